#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "trendcast/cascade.hpp"
#include "trendcast/dataset.hpp"
#include "trendcast/evaluation.hpp"
#include "trendcast/selection.hpp"
#include "trendcast/synth.hpp"
#include "trendcast/wavelet.hpp"

namespace fs = std::filesystem;
using namespace trendcast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Atomic write: temp file in the same directory, then rename.
void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    }
    return out;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string importance_csv(const WienerCascadeModel& model) {
    std::string out = "name,score,rank\n";
    for (const auto& e : feature_importance(model)) {
        out += e.name + ',' + format_double(e.score) + ',' + std::to_string(e.rank) + '\n';
    }
    return out;
}

std::string periodicity_csv(
    const std::vector<std::pair<std::string, PeriodicityScore>>& ranking) {
    std::string out = "rank,name,annual_ratio,semiannual_ratio,label\n";
    int rank = 1;
    for (const auto& [name, score] : ranking) {
        out += std::to_string(rank++) + ',' + name + ',' + format_double(score.annual_ratio) +
               ',' + format_double(score.semiannual_ratio) + ',' + to_string(score.label) + '\n';
    }
    return out;
}

struct EvaluateOptions {
    std::string dataset_path;
    std::string target;
    std::string features = "all";
    Eigen::Index lags = 52;
    std::string lambda = "auto";
    int folds = 5;
    std::string selection_scope = "global";
    std::uint64_t seed = 0;
    bool matrix = false;
    std::string out_dir = ".";
};

CascadeConfig make_config(const EvaluateOptions& opt) {
    CascadeConfig config;
    config.lag_depth = opt.lags;
    if (opt.lambda == "auto") {
        config.lambda = -1.0;
    } else {
        std::size_t pos = 0;
        config.lambda = std::stod(opt.lambda, &pos);
        if (pos != opt.lambda.size() || config.lambda < 0.0) {
            throw std::invalid_argument("bad --lambda value '" + opt.lambda + "'");
        }
    }
    return config;
}

SelectionScope make_scope(const std::string& s) {
    if (s == "global") return SelectionScope::Global;
    if (s == "per-fold") return SelectionScope::PerFold;
    throw std::invalid_argument("bad --selection-scope '" + s + "' (global | per-fold)");
}

int run_evaluate_cell(const Dataset& d, const std::string& target, const std::string& features,
                      const EvaluateOptions& opt, std::string* summary_line) {
    SelectionSpec spec = parse_selection_spec(features);
    if (spec.mode == SelectionMode::TopWeighted) spec.base_target = target;
    CascadeConfig config = make_config(opt);
    SelectionScope scope = make_scope(opt.selection_scope);

    CvReport report = cross_validate(d, target, spec, config, opt.folds, scope);

    const std::string stem = sanitize(target) + "_" + sanitize(features);
    write_file(fs::path(opt.out_dir) / (stem + ".report.json"), report_to_json(report));
    write_file(fs::path(opt.out_dir) / (stem + ".predictions.csv"),
               predictions_to_csv(report, d.start_week));

    if (!opt.matrix) {
        // Also export the full-data model for the importance surface.
        FoldPlan plan = make_fold_plan(d.rows(), config.lag_depth, opt.folds);
        SelectionContext ctx;
        if (spec.mode == SelectionMode::TopPeriodic) {
            ctx.periodicity = rank_periodic(d, WaveletConfig{});
        } else if (spec.mode == SelectionMode::TopWeighted) {
            ctx.base_model = train(d, target, d.predictor_names(), config, plan.usable_indices());
        }
        auto names = select_features(d, spec, ctx);
        auto model = train(d, target, names, config, plan.usable_indices());
        write_file(fs::path(opt.out_dir) / (stem + ".model.json"), model_to_json(model));
    }

    if (summary_line) {
        *summary_line = features + ',' + target + ',' + format_double(report.pooled.mse) + ',' +
                        format_double(report.pooled.rho) + ',' +
                        format_double(report.pooled.p_value) + '\n';
    }
    std::cout << target << " / " << features << ": rho=" << report.pooled.rho
              << " p=" << report.pooled.p_value << " mse=" << report.pooled.mse << "\n";
    return kExitOk;
}

int run_evaluate(const EvaluateOptions& opt) {
    Dataset d = dataset_from_json(read_file(opt.dataset_path));
    if (!opt.matrix) {
        if (opt.target.empty()) throw std::invalid_argument("--target is required");
        return run_evaluate_cell(d, opt.target, opt.features, opt, nullptr);
    }
    const auto targets = d.target_names();
    if (targets.empty()) throw std::invalid_argument("--matrix needs tagged targets");
    const std::vector<std::string> scenarios = {"all", "periodic:10", "weighted:10"};
    std::string summary = "scenario,target,mse,rho,p\n";
    for (const auto& scenario : scenarios) {
        for (const auto& target : targets) {
            std::string line;
            run_evaluate_cell(d, target, scenario, opt, &line);
            summary += line;
        }
    }
    write_file(fs::path(opt.out_dir) / "summary.csv", summary);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trendcast: Wiener-cascade decoding of weekly search-index panels"};
    app.require_subcommand(1);

    // ingest
    std::string in_csv, targets_csv, out_dir = ".";
    auto* ingest = app.add_subcommand("ingest", "Parse a weekly CSV into canonical dataset JSON");
    ingest->add_option("csv", in_csv, "input CSV path")->required();
    ingest->add_option("--targets", targets_csv, "comma-separated target series names");
    ingest->add_option("--out", out_dir, "output directory");

    // scalogram
    std::string sc_dataset, sc_series;
    double sc_omega0 = 6.0, sc_fmin = 0.5, sc_fmax = 4.0;
    int sc_voices = 48;
    std::string sc_out = ".";
    auto* scalogram = app.add_subcommand("scalogram", "Morlet CWT power of one series");
    scalogram->add_option("dataset", sc_dataset, "dataset JSON path")->required();
    scalogram->add_option("--series", sc_series, "series name")->required();
    scalogram->add_option("--omega0", sc_omega0, "Morlet center frequency");
    scalogram->add_option("--fmin", sc_fmin, "lowest frequency, cycles/year");
    scalogram->add_option("--fmax", sc_fmax, "highest frequency, cycles/year");
    scalogram->add_option("--voices", sc_voices, "number of grid frequencies");
    scalogram->add_option("--out", sc_out, "output directory");

    // periodicity
    std::string pd_dataset, pd_out = ".";
    auto* periodicity = app.add_subcommand("periodicity", "Rank predictors by cyclic tendency");
    periodicity->add_option("dataset", pd_dataset, "dataset JSON path")->required();
    periodicity->add_option("--out", pd_out, "output directory");

    // evaluate
    EvaluateOptions ev;
    auto* evaluate = app.add_subcommand("evaluate", "Cross-validated decoding of a target");
    evaluate->add_option("dataset", ev.dataset_path, "dataset JSON path")->required();
    evaluate->add_option("--target", ev.target, "target series name");
    evaluate->add_option("--features", ev.features, "all | periodic:<k> | weighted:<k>");
    evaluate->add_option("--lags", ev.lags, "lag depth in weeks");
    evaluate->add_option("--lambda", ev.lambda, "ridge constant, or 'auto'");
    evaluate->add_option("--folds", ev.folds, "fold count");
    evaluate->add_option("--selection-scope", ev.selection_scope, "global | per-fold");
    evaluate->add_option("--seed", ev.seed, "seed (reserved for resampling modes)");
    evaluate->add_flag("--matrix", ev.matrix, "run all target x selection combinations");
    evaluate->add_option("--out", ev.out_dir, "output directory");

    // importance
    std::string im_model, im_out = ".";
    auto* importance = app.add_subcommand("importance", "Per-feature sum of |filter weights|");
    importance->add_option("model", im_model, "model JSON path")->required();
    importance->add_option("--out", im_out, "output directory");

    // synth
    std::string sy_spec, sy_out;
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic panel");
    synth->add_option("--spec", sy_spec, "synth spec JSON path")->required();
    synth->add_option("--out", sy_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*ingest) {
            Dataset d = parse_trends_csv(read_file(in_csv));
            if (!targets_csv.empty()) d.set_targets(split_commas(targets_csv));
            write_file(fs::path(out_dir) / "dataset.json", dataset_to_json(d));
            std::cout << d.predictor_names().size() << " predictors, "
                      << d.target_names().size() << " variables, T=" << d.rows() << "\n";
        } else if (*scalogram) {
            Dataset d = dataset_from_json(read_file(sc_dataset));
            const Eigen::Index c = d.column(sc_series);
            std::vector<double> series(d.values.col(c).data(), d.values.col(c).data() + d.rows());
            auto grid = FrequencyGrid::log_spaced(sc_fmin, sc_fmax, sc_voices);
            auto scal = morlet_cwt(series, 52.0, grid, sc_omega0);
            const std::string stem = sanitize(sc_series);
            write_file(fs::path(sc_out) / (stem + ".scalogram.csv"), scalogram_to_csv(scal));
            write_file(fs::path(sc_out) / (stem + ".scalogram.meta.json"),
                       scalogram_meta_json(scal, sc_series));
        } else if (*periodicity) {
            Dataset d = dataset_from_json(read_file(pd_dataset));
            auto ranking = rank_periodic(d, WaveletConfig{});
            write_file(fs::path(pd_out) / "periodicity.csv", periodicity_csv(ranking));
            std::cout << periodicity_csv(ranking);
        } else if (*evaluate) {
            return run_evaluate(ev);
        } else if (*importance) {
            auto model = model_from_json(read_file(im_model));
            const std::string stem = sanitize(model.target_name);
            write_file(fs::path(im_out) / (stem + ".importance.csv"), importance_csv(model));
            std::cout << importance_csv(model);
        } else if (*synth) {
            auto spec = SynthSpec::from_json(read_file(sy_spec));
            Dataset d = gen_panel(spec);
            write_file(fs::path(sy_out), to_trends_csv(d));
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
