#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "udbm/data_pipeline.hpp"
#include "udbm/dbm.hpp"
#include "udbm/generation.hpp"
#include "udbm/oracle.hpp"
#include "udbm/rbm.hpp"

namespace {

using namespace udbm;

constexpr const char* kDayNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);
    return out;
}

struct TrainOptions {
    std::string matrix_path;
    std::string out_path = "model.json";
    std::vector<long> layer_dims = {7, 7, 1};
    double pretrain_lr = 0.007;
    double dbm_lr = 0.008;
    int pretrain_epochs = 40;
    int dbm_epochs = 40;
    int batch_size = 1;
    int gibbs_steps = 1;
    std::uint64_t seed = 0;
    bool use_biases = false;
};

int run_ingest(const std::string& input_path, const std::string& out_path) {
    auto in = open_input(input_path);
    const LoadResult loaded = load_records(in);
    const WeekMatrix matrix = assemble_weeks(loaded.records);

    std::set<std::pair<std::string, std::string>> weeks_seen;
    for (const auto& rec : loaded.records)
        weeks_seen.insert({rec.subject_id, iso_week_id(std::chrono::sys_days{rec.date})});
    for (const auto& [subject, date] : loaded.unrecorded_days)
        weeks_seen.insert({subject, iso_week_id(std::chrono::sys_days{date})});

    auto out = open_output(out_path);
    write_week_matrix(matrix, out);
    std::cout << "weeks before empty-week deletion: " << weeks_seen.size() << "\n"
              << "weeks after empty-week deletion:  " << matrix.rows.size() << "\n";
    if (matrix.rows.empty()) std::cerr << "warning: output matrix has zero rows\n";
    return 0;
}

int run_train(const TrainOptions& opt) {
    if (opt.layer_dims.size() < 2) throw DataError("--layer-dims needs at least 2 entries");
    if (opt.layer_dims[0] != 7) throw DataError("--layer-dims must start with 7 (one unit per weekday)");

    auto in = open_input(opt.matrix_path);
    const WeekMatrix matrix = read_week_matrix(in);
    if (matrix.rows.empty()) throw DataError("week matrix is empty");
    const Eigen::MatrixXd data = to_dense(matrix);

    TrainConfig pretrain_cfg;
    pretrain_cfg.learning_rate = opt.pretrain_lr;
    pretrain_cfg.epochs = opt.pretrain_epochs;
    pretrain_cfg.batch_size = opt.batch_size;
    pretrain_cfg.gibbs_steps = opt.gibbs_steps;
    pretrain_cfg.seed = opt.seed;
    pretrain_cfg.use_biases = opt.use_biases;
    pretrain_cfg.validate();

    TrainConfig dbm_cfg = pretrain_cfg;
    dbm_cfg.learning_rate = opt.dbm_lr;
    dbm_cfg.epochs = opt.dbm_epochs;
    dbm_cfg.validate();

    std::vector<Eigen::Index> dims(opt.layer_dims.begin(), opt.layer_dims.end());
    const auto stack = pretrain_stack(dims, data, pretrain_cfg);
    const DbmModel initial = stack_to_dbm(stack);

    long total_units = 0;
    for (auto d : opt.layer_dims) total_units += d;
    const bool exact_ok = total_units <= oracle::kMaxTotalUnits;
    if (exact_ok)
        std::cout << "exact log-likelihood before training: " << oracle::exact_loglik(initial, data)
                  << "\n";

    const DbmModel trained = train_dbm(initial, data, dbm_cfg);
    if (exact_ok)
        std::cout << "exact log-likelihood after training:  " << oracle::exact_loglik(trained, data)
                  << "\n";

    auto out = open_output(opt.out_path);
    save_model(trained, out);
    std::cout << "model written to " << opt.out_path << "\n";
    return 0;
}

DbmModel load_model_file(const std::string& path) {
    auto in = open_input(path);
    return load_model(in);
}

int run_heatmap(const std::string& model_path, long samples, std::uint64_t seed,
                const std::string& prefix, int cell_size) {
    const DbmModel model = load_model_file(model_path);
    Rng rng(seed);
    const PatternTable table = usage_heatmap(model, samples, rng);
    {
        auto csv = open_output(prefix + ".csv");
        write_pattern_csv(table, csv);
    }
    {
        auto pgm = open_output(prefix + ".pgm");
        write_pattern_pgm(table, pgm, cell_size);
    }
    std::cout << "wrote " << prefix << ".csv and " << prefix << ".pgm\n";
    return 0;
}

int run_generate(const std::string& model_path, long samples, std::uint64_t seed,
                 const std::string& out_path) {
    const DbmModel model = load_model_file(model_path);
    const auto sizes = model.layer_sizes();
    Rng rng(seed);
    auto out = open_output(out_path);
    out << "condition";
    for (int j = 0; j < sizes[0]; ++j) out << ',' << (sizes[0] == 7 ? kDayNames[j] : ("v" + std::to_string(j)));
    out << '\n';
    for (const char* label : {"on", "off"}) {
        const double bit = std::string(label) == "on" ? 1.0 : 0.0;
        const Eigen::VectorXd potential =
            top_down_potential(model, Eigen::VectorXd::Constant(sizes.back(), bit));
        const Eigen::MatrixXi draws = sample_binary(potential, samples, rng);
        for (long k = 0; k < samples; ++k) {
            out << label;
            for (Eigen::Index j = 0; j < draws.cols(); ++j) out << ',' << draws(k, j);
            out << '\n';
        }
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& matrix_path,
                 std::uint64_t seed, long samples) {
    const DbmModel model = load_model_file(model_path);
    auto in = open_input(matrix_path);
    const WeekMatrix matrix = read_week_matrix(in);
    if (matrix.rows.empty()) throw DataError("week matrix is empty");
    const Eigen::MatrixXd data = to_dense(matrix);
    if (data.cols() != model.weights[0].rows())
        throw DataError("model visible layer does not match matrix column count");

    long total_units = 0;
    for (auto n : model.layer_sizes()) total_units += n;

    if (total_units <= oracle::kMaxTotalUnits) {
        const double log_z = oracle::partition_function(model);
        const auto rows = oracle::exact_loglik_rows(model, data);
        double mean = 0.0;
        for (double x : rows) mean += x;
        mean /= static_cast<double>(rows.size());
        std::cout << "exact mean log-likelihood: " << mean << "\n";
        std::cout << "row,exact_loglik,mean_field_lower_bound\n";
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Eigen::VectorXd v = data.row(static_cast<Eigen::Index>(r)).transpose();
            const MeanFieldState mf = mean_field_infer(model, v);
            const double bound = variational_bound_unnormalized(model, v, mf) - log_z;
            std::cout << r << ',' << rows[r] << ',' << bound << "\n";
        }
    } else {
        std::cout << "model exceeds the enumeration guard; exact metrics skipped\n";
    }

    // per-day marginals: data vs a long Gibbs run
    Rng rng(seed);
    GibbsParticle particle = random_particle(model, rng);
    const long burn_in = 1000;
    for (long k = 0; k < burn_in; ++k) particle = gibbs_step(model, particle, rng);
    Eigen::VectorXd model_marginal = Eigen::VectorXd::Zero(data.cols());
    for (long k = 0; k < samples; ++k) {
        particle = gibbs_step(model, particle, rng);
        model_marginal += particle.state[0];
    }
    model_marginal /= static_cast<double>(samples);
    const Eigen::VectorXd data_marginal = data.colwise().mean().transpose();
    std::cout << "day,data_marginal,model_marginal\n";
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const std::string day = data.cols() == 7 ? kDayNames[j] : "v" + std::to_string(j);
        std::cout << day << ',' << data_marginal(j) << ',' << model_marginal(j) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Binary deep Boltzmann machines over weekly activity-tracker usage"};
    app.require_subcommand(1);

    std::string input_path, out_path, model_path, matrix_path, prefix = "heatmap";
    std::uint64_t seed = 0;
    long samples = 10000;
    int cell_size = 32;
    TrainOptions train_opt;

    auto* ingest = app.add_subcommand("ingest", "Convert a step-count CSV into a week matrix");
    ingest->add_option("input", input_path, "step-count CSV (subject_id,date,steps)")->required();
    ingest->add_option("--out", out_path, "week-matrix output path")->required();

    auto* train = app.add_subcommand("train", "Pretrain and train a DBM on a week matrix");
    train->add_option("matrix", train_opt.matrix_path, "week-matrix CSV")->required();
    train->add_option("--out", train_opt.out_path, "model output path");
    train->add_option("--layer-dims", train_opt.layer_dims, "layer sizes, visible first")
        ->delimiter(',');
    train->add_option("--pretrain-lr", train_opt.pretrain_lr, "pretraining learning rate");
    train->add_option("--dbm-lr", train_opt.dbm_lr, "DBM learning rate");
    train->add_option("--pretrain-epochs", train_opt.pretrain_epochs, "pretraining epochs");
    train->add_option("--dbm-epochs", train_opt.dbm_epochs, "DBM training epochs");
    train->add_option("--batch-size", train_opt.batch_size, "minibatch size");
    train->add_option("--gibbs-steps", train_opt.gibbs_steps, "Gibbs sweeps per update");
    train->add_option("--seed", train_opt.seed, "RNG seed");
    train->add_flag("--biases,!--no-biases", train_opt.use_biases, "train bias terms");

    auto* heatmap = app.add_subcommand("heatmap", "Emit the conditioned usage-pattern table");
    heatmap->add_option("model", model_path, "model file")->required();
    heatmap->add_option("--samples", samples, "samples per condition");
    heatmap->add_option("--seed", seed, "RNG seed");
    heatmap->add_option("--out", prefix, "output prefix (.csv and .pgm)");
    heatmap->add_option("--cell-size", cell_size, "PGM pixels per cell");

    auto* generate = app.add_subcommand("generate", "Write raw conditioned samples to CSV");
    generate->add_option("model", model_path, "model file")->required();
    generate->add_option("--samples", samples, "samples per condition");
    generate->add_option("--seed", seed, "RNG seed");
    generate->add_option("--out", out_path, "output CSV path")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Report likelihood and marginal diagnostics");
    evaluate->add_option("model", model_path, "model file")->required();
    evaluate->add_option("matrix", matrix_path, "week-matrix CSV")->required();
    evaluate->add_option("--samples", samples, "Gibbs sweeps for sampled marginals");
    evaluate->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
        if (*ingest) return run_ingest(input_path, out_path);
        if (*train) return run_train(train_opt);
        if (*heatmap) return run_heatmap(model_path, samples, seed, prefix, cell_size);
        if (*generate) return run_generate(model_path, samples, seed, out_path);
        if (*evaluate) return run_evaluate(model_path, matrix_path, seed, samples);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
