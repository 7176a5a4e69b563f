#include "udbm/data_pipeline.hpp"

#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace udbm {

int dichotomize(long steps) {
    if (steps < 0)
        throw DataError("negative step count: " + std::to_string(steps));
    return steps > 0 ? 1 : 0;
}

int iso_weekday(std::chrono::sys_days day) {
    return static_cast<int>(std::chrono::weekday{day}.iso_encoding());
}

std::string iso_week_id(std::chrono::sys_days day) {
    using namespace std::chrono;
    // ISO week of a date is the week of its Thursday
    const sys_days thursday = day + days{4 - iso_weekday(day)};
    const year_month_day thu_ymd{thursday};
    const sys_days jan1{thu_ymd.year() / January / 1};
    const int week = static_cast<int>((thursday - jan1).count()) / 7 + 1;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-W%02d", static_cast<int>(thu_ymd.year()), week);
    return buf;
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

std::chrono::year_month_day parse_date(std::string_view s, std::size_t line_no) {
    auto fail = [&] {
        throw DataError("line " + std::to_string(line_no) + ": malformed date '" +
                        std::string(s) + "' (expected YYYY-MM-DD)");
    };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
    const auto y = s.substr(0, 4), m = s.substr(5, 2), d = s.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) fail();
    int yi = 0, mi = 0, di = 0;
    std::from_chars(y.data(), y.data() + y.size(), yi);
    std::from_chars(m.data(), m.data() + m.size(), mi);
    std::from_chars(d.data(), d.data() + d.size(), di);
    const std::chrono::year_month_day ymd{std::chrono::year{yi}, std::chrono::month{unsigned(mi)},
                                          std::chrono::day{unsigned(di)}};
    if (!ymd.ok()) fail();
    return ymd;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

LoadResult load_records(std::istream& in) {
    LoadResult out;
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "subject_id,date,steps")
        throw DataError("missing or invalid header (expected 'subject_id,date,steps')");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw DataError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                            std::to_string(fields.size()));
        const auto date = parse_date(fields[1], line_no);
        if (fields[2].empty()) {
            out.unrecorded_days.emplace_back(fields[0], date);
            continue;
        }
        long steps = 0;
        const auto& sf = fields[2];
        const auto [p, ec] = std::from_chars(sf.data(), sf.data() + sf.size(), steps);
        if (ec != std::errc{} || p != sf.data() + sf.size())
            throw DataError("line " + std::to_string(line_no) + ": invalid steps field '" + sf + "'");
        if (steps < 0)
            throw DataError("line " + std::to_string(line_no) + ": negative steps " +
                            std::to_string(steps));
        out.records.push_back({fields[0], date, steps});
    }
    return out;
}

WeekMatrix assemble_weeks(const std::vector<StepRecord>& records) {
    std::set<std::pair<std::string, std::chrono::sys_days>> seen;
    std::map<std::pair<std::string, std::string>, WeekRow> weeks;
    for (const auto& rec : records) {
        const std::chrono::sys_days day{rec.date};
        if (!seen.insert({rec.subject_id, day}).second) {
            char date_buf[16];
            std::snprintf(date_buf, sizeof(date_buf), "%04d-%02u-%02u",
                          static_cast<int>(rec.date.year()),
                          static_cast<unsigned>(rec.date.month()),
                          static_cast<unsigned>(rec.date.day()));
            throw DataError("duplicate record for subject '" + rec.subject_id + "' on " +
                            date_buf);
        }
        const auto key = std::make_pair(rec.subject_id, iso_week_id(day));
        auto [it, inserted] = weeks.try_emplace(key);
        if (inserted) {
            it->second.subject_id = key.first;
            it->second.iso_week = key.second;
        }
        const int j = iso_weekday(day) - 1;
        it->second.values[j] = static_cast<std::uint8_t>(dichotomize(rec.steps));
        it->second.recorded[j] = true;
    }
    WeekMatrix out;
    out.rows.reserve(weeks.size());
    for (auto& [key, row] : weeks) out.rows.push_back(std::move(row));
    return out;
}

void write_week_matrix(const WeekMatrix& m, std::ostream& out) {
    out << "subject_id,iso_week,mon,tue,wed,thu,fri,sat,sun\n";
    for (const auto& row : m.rows) {
        out << row.subject_id << ',' << row.iso_week;
        for (int j = 0; j < 7; ++j) out << ',' << int(row.values[j]);
        out << '\n';
    }
}

WeekMatrix read_week_matrix(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        strip_cr(line) != "subject_id,iso_week,mon,tue,wed,thu,fri,sat,sun")
        throw DataError("missing or invalid week-matrix header");
    WeekMatrix out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 9)
            throw DataError("line " + std::to_string(line_no) + ": expected 9 fields");
        WeekRow row;
        row.subject_id = fields[0];
        row.iso_week = fields[1];
        for (int j = 0; j < 7; ++j) {
            const auto& f = fields[2 + j];
            if (f != "0" && f != "1")
                throw DataError("line " + std::to_string(line_no) + ": cell must be 0 or 1, got '" +
                                f + "'");
            row.values[j] = static_cast<std::uint8_t>(f == "1");
            row.recorded[j] = true;  // provenance is not round-tripped through this format
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd to_dense(const WeekMatrix& m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows.size()), 7);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (int j = 0; j < 7; ++j) out(r, j) = m.rows[r].values[j];
    return out;
}

}  // namespace udbm
