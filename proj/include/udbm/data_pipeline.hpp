#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "udbm/errors.hpp"

namespace udbm {

// One person-day of raw tracker output.
struct StepRecord {
    std::string subject_id;
    std::chrono::year_month_day date;
    long steps = 0;
};

struct LoadResult {
    std::vector<StepRecord> records;
    // person-days whose steps field was empty (tracker produced no value)
    std::vector<std::pair<std::string, std::chrono::year_month_day>> unrecorded_days;
};

// One week of binarized usage, Monday..Sunday.
struct WeekRow {
    std::string subject_id;
    std::string iso_week;  // "YYYY-Www"
    std::array<std::uint8_t, 7> values{};
    std::array<bool, 7> recorded{};
};

struct WeekMatrix {
    std::vector<WeekRow> rows;
};

// steps > 0 -> 1, steps == 0 -> 0; negative steps signal a corrupt record.
int dichotomize(long steps);

// Parses `subject_id,date,steps` CSV. Dates are strict YYYY-MM-DD. Lines with
// an empty steps field are skipped and counted as unrecorded days.
LoadResult load_records(std::istream& in);

// Groups records by (subject, ISO-8601 week), dichotomizes each recorded day
// and drops weeks with no recorded day at all. Unrecorded days inside a kept
// week become 0. Rows come out sorted by (subject_id, iso_week).
WeekMatrix assemble_weeks(const std::vector<StepRecord>& records);

// "YYYY-Www" ISO week identifier and ISO weekday (Monday=1..Sunday=7)
std::string iso_week_id(std::chrono::sys_days day);
int iso_weekday(std::chrono::sys_days day);

void write_week_matrix(const WeekMatrix& m, std::ostream& out);
WeekMatrix read_week_matrix(std::istream& in);

// rows x 7 dense view for training
Eigen::MatrixXd to_dense(const WeekMatrix& m);

}  // namespace udbm
