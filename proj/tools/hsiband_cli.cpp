// hsiband: band ranking, selection and accuracy tables for hyperspectral scenes.
//
//   hsiband rank     --cube X --gt Y [--out DIR]
//   hsiband select   --cube X --gt Y --method hybrid --th -0.0035 --max-bands 53
//   hsiband table    --cube X --gt Y --method hybrid --thresholds -0.02,0 --repeats 5
//   hsiband evaluate --cube X --gt Y --bands 3,17,29
//
// Every subcommand also takes --config FILE with `flag = value` lines; flags
// given on the command line take precedence.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsiband/hsiband.hpp"

namespace fs = std::filesystem;
using namespace hsiband;

namespace {

struct Options {
    std::string cube, header, gt, out = ".", config;
    std::size_t levels = 256;
    int verbose = 0;

    // selection
    std::string method = "hybrid";
    double th = 0.0;
    std::size_t max_bands = 80;
    std::size_t stage1_keep = 100;
    std::uint64_t seed = 0;
    double fraction = 0.5;
    SvmParams svm;

    // table
    std::string thresholds = "-0.02,-0.005,-0.0035,0";
    std::string band_counts;
    std::size_t repeats = 5;
    std::uint64_t base_seed = 0;
    std::string from_trace;
    std::string run_log = "runs.jsonl";

    // evaluate
    std::string bands, bands_file;
    bool grid = false;
};

int verbosity = 0;

void info(const std::string& msg) {
    if (verbosity > 0) std::cerr << "hsiband: " << msg << '\n';
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void add_dataset_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--cube", o.cube, "Raw BSQ int16 cube")->required();
    cmd->add_option("--header", o.header, "ENVI-style descriptor (default: <cube>.hdr)");
    cmd->add_option("--gt", o.gt, "Ground truth: CSV grid or PGM")->required();
    cmd->add_option("--levels", o.levels, "Quantization levels L")->capture_default_str()->check(CLI::Range(2, 65536));
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--config", o.config, "key = value file merged under the command line");
    cmd->add_flag("-v,--verbose", o.verbose, "Progress on stderr (repeat for more)");
}

void add_svm_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--svm-c", o.svm.c, "SVM box constraint C")->capture_default_str();
    cmd->add_option("--svm-gamma", o.svm.gamma, "RBF gamma on [0,1]-scaled features")->capture_default_str();
    cmd->add_option("--svm-tol", o.svm.tolerance, "SMO stopping tolerance")->capture_default_str();
    cmd->add_option("--svm-max-iter", o.svm.max_iterations, "SMO iteration cap per pairwise machine")
        ->capture_default_str();
    cmd->add_option("--fraction", o.fraction, "Training share of each class")->capture_default_str();
}

void add_selection_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--method", o.method, "hybrid, ig or mi-filter")
        ->capture_default_str()
        ->check(CLI::IsMember({"hybrid", "ig", "mi-filter"}));
    cmd->add_option("--stage1-keep", o.stage1_keep, "Bands kept after IG ranking (hybrid)")->capture_default_str();
}

Dataset load(const Options& o) {
    Stopwatch t;
    auto d = load_dataset(o.cube, o.header, o.gt, o.levels);
    info("loaded " + std::to_string(d.cube.rows()) + "x" + std::to_string(d.cube.cols()) + "x" +
         std::to_string(d.cube.bands()) + " cube, " + std::to_string(d.gt.labeled_count()) +
         " labeled pixels in " + std::to_string(d.gt.num_classes()) + " classes (" +
         text::format_fixed(t.seconds(), 2) + " s)");
    return d;
}

fs::path out_dir(const Options& o) {
    fs::path dir(o.out);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw io_error("write failed: " + path.string());
}

SelectionConfig selection_config(const Options& o) {
    SelectionConfig cfg;
    cfg.threshold = o.th;
    cfg.stage1_keep = o.stage1_keep;
    cfg.target_bands = o.max_bands;
    cfg.levels = o.levels;
    cfg.svm = o.svm;
    cfg.seed = o.seed;
    cfg.fraction = o.fraction;
    return cfg;
}

int cmd_rank(const Options& o) {
    const auto d = load(o);
    const auto ranked = rank_by_ig(d.cube, d.gt, d.gt.labeled_mask());
    const auto path = out_dir(o) / "band_scores.csv";
    auto out = open_out(path);
    out << "band,mutual_info\n";
    for (const auto& s : ranked) out << s.band << ',' << text::format_double(s.score) << '\n';
    finish(out, path);
    std::cout << "ranked " << ranked.size() << " bands -> " << path.string() << '\n';
    return 0;
}

int cmd_select(const Options& o) {
    const auto d = load(o);
    const auto method = parse_method(o.method);
    SelectionResult r;
    Stopwatch t;
    switch (method) {
        case SelectionMethod::hybrid: {
            const auto cfg = selection_config(o);
            cfg.validate();
            r = run_hybrid(d.cube, d.gt, split_labeled(d.gt, cfg.fraction, cfg.seed), cfg);
            break;
        }
        case SelectionMethod::ig:
            r = select_ig(d.cube, d.gt, std::min(o.max_bands, d.cube.bands()));
            break;
        case SelectionMethod::mi_filter:
            r = baseline_mi_filter(d.cube, d.gt, o.th, o.max_bands);
            break;
    }
    r.seed = o.seed;
    if (method != SelectionMethod::ig) r.threshold = o.th;
    info("selection took " + text::format_fixed(t.seconds(), 1) + " s");

    const auto dir = out_dir(o);
    const auto retained_path = dir / "retained_bands.txt";
    auto retained = open_out(retained_path);
    write_retained(retained, r);
    finish(retained, retained_path);
    const auto trace_path = dir / "trace.csv";
    auto trace = open_out(trace_path);
    write_trace(trace, r);
    finish(trace, trace_path);
    std::cout << "retained " << r.retained.size() << " bands -> " << retained_path.string() << '\n';
    return 0;
}

ExperimentSpec experiment_spec(const Options& o) {
    ExperimentSpec spec;
    spec.method = parse_method(o.method);
    spec.thresholds = parse_list<double>(o.thresholds);
    spec.band_counts = o.band_counts.empty()
                           ? (spec.method == SelectionMethod::hybrid ? wrapper_checkpoints : filter_checkpoints)
                           : parse_list<std::size_t>(o.band_counts);
    spec.repeats = o.repeats;
    spec.base_seed = o.base_seed;
    spec.cube_path = o.cube;
    spec.descriptor_path = o.header;
    spec.gt_path = o.gt;
    spec.selection = selection_config(o);
    return spec;
}

void write_tables(const fs::path& dir, const EvalReport& report) {
    write_report(dir / "table.csv", report, "csv");
    write_report(dir / "table_long.csv", report, "csv-long");
    write_report(dir / "table.md", report, "markdown");
    std::cout << "wrote " << (dir / "table.csv").string() << ", table_long.csv and table.md\n";
    for (const auto& n : report.notes) info(n);
}

int cmd_table(const Options& o) {
    auto spec = experiment_spec(o);
    const auto d = load(o);
    const auto dir = out_dir(o);
    Stopwatch t;
    EvalReport report;
    if (!o.from_trace.empty()) {
        std::ifstream in(o.from_trace);
        if (!in) throw io_error("cannot open trace: " + o.from_trace);
        const auto trace = read_trace(in);
        report = replay_trace(spec, d.cube, d.gt, trace);
    } else {
        const fs::path log = o.run_log.empty() ? fs::path() : dir / o.run_log;
        report = run_experiment(spec, d.cube, d.gt, log);
    }
    info("table took " + text::format_fixed(t.seconds(), 1) + " s");
    write_tables(dir, report);
    return 0;
}

std::vector<std::size_t> read_band_list(const Options& o) {
    std::vector<std::size_t> bands;
    if (!o.bands.empty()) bands = parse_list<std::size_t>(o.bands);
    if (!o.bands_file.empty()) {
        std::ifstream in(o.bands_file);
        if (!in) throw io_error("cannot open band list: " + o.bands_file);
        for (std::string line; std::getline(in, line);) {
            const auto t = text::trim(line);
            if (t.empty() || t.front() == '#') continue;
            for (auto b : parse_list<std::size_t>(t)) bands.push_back(b);
        }
    }
    if (bands.empty()) throw parameter_error("evaluate: give --bands or --bands-file");
    return bands;
}

int cmd_evaluate(const Options& o) {
    const auto bands = read_band_list(o);
    const auto d = load(o);
    const auto split = split_labeled(d.gt, o.fraction, o.seed);
    const auto dir = out_dir(o);
    SvmParams svm = o.svm;

    if (o.grid) {
        const auto x = extract_features(d.cube, bands, split.train);
        const auto y = masked_labels(d.gt, split.train);
        const auto g = grid_search(x, y, svm, o.seed);
        const auto grid_path = dir / "grid_search.csv";
        auto out = open_out(grid_path);
        out << "c,gamma,cv_accuracy\n";
        for (const auto& p : g.points)
            out << text::format_double(p.c) << ',' << text::format_double(p.gamma) << ','
                << text::format_fixed(p.accuracy, 4) << '\n';
        finish(out, grid_path);
        svm = g.best;
        std::cout << "grid search: C=" << text::format_double(svm.c)
                  << " gamma=" << text::format_double(svm.gamma) << '\n';
    }

    const auto acc = evaluate_subset(d.cube, d.gt, split, bands, svm, o.seed);
    const auto path = dir / "evaluation.csv";
    auto out = open_out(path);
    out << "bands,seed,overall,mean_per_class,correct,total\n"
        << bands.size() << ',' << o.seed << ',' << text::format_fixed(acc.overall, 4) << ','
        << text::format_fixed(acc.mean_per_class, 4) << ',' << acc.correct << ',' << acc.total << '\n';
    finish(out, path);
    std::cout << "accuracy " << text::format_fixed(acc.overall, 2) << "% (" << acc.correct << '/' << acc.total
              << ") with " << bands.size() << " bands\n";
    return 0;
}

// Pulls --config FILE out of argv and splices its entries in front of the
// remaining flags, right after the subcommand, so later (command line)
// values win.
std::vector<std::string> merge_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty() || args.empty()) return args;
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_kv_config(path)) {
        if (key == "config") continue;
        injected.push_back("--" + key);
        injected.push_back(value);
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Band selection for hyperspectral classification"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    Options o;

    auto* rank = app.add_subcommand("rank", "Score every band by I(band; C) and write band_scores.csv");
    add_dataset_flags(rank, o);

    auto* select = app.add_subcommand("select", "Run one selection; write retained_bands.txt and trace.csv");
    add_dataset_flags(select, o);
    add_selection_flags(select, o);
    add_svm_flags(select, o);
    select->add_option("--th", o.th, "Acceptance threshold")->capture_default_str();
    select->add_option("--max-bands", o.max_bands, "Stop after this many retained bands")->capture_default_str();
    select->add_option("--seed", o.seed, "Split and SVM seed")->capture_default_str();

    auto* table = app.add_subcommand("table", "Accuracy table over thresholds and band counts");
    add_dataset_flags(table, o);
    add_selection_flags(table, o);
    add_svm_flags(table, o);
    table->add_option("--thresholds", o.thresholds, "Comma-separated thresholds, one column each")
        ->capture_default_str();
    table->add_option("--band-counts", o.band_counts,
                      "Comma-separated checkpoints (default depends on --method)");
    table->add_option("--repeats", o.repeats, "Random splits per column")->capture_default_str();
    table->add_option("--base-seed", o.base_seed, "Repeat r uses seed base + r")->capture_default_str();
    table->add_option("--from-trace", o.from_trace, "Re-evaluate a trace.csv instead of selecting");
    table->add_option("--run-log", o.run_log, "JSON-lines run log inside --out; empty disables")
        ->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "Train and score an SVM on a given band subset");
    add_dataset_flags(evaluate, o);
    add_svm_flags(evaluate, o);
    evaluate->add_option("--bands", o.bands, "Comma-separated 0-based band indices");
    evaluate->add_option("--bands-file", o.bands_file, "One band per line (retained_bands.txt)");
    evaluate->add_option("--seed", o.seed, "Split and SVM seed")->capture_default_str();
    evaluate->add_flag("--grid-search", o.grid, "Pick C and gamma by 5-fold CV on the training half");

    try {
        auto args = merge_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "hsiband: usage error: " << e.what() << " (see --help)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hsiband: usage error: " << e.what() << '\n';
        return 2;
    }

    verbosity = o.verbose;
    scoped_warning_handler warnings([](std::string_view msg) { std::cerr << "hsiband: warning: " << msg << '\n'; });
    try {
        if (*rank) return cmd_rank(o);
        if (*select) return cmd_select(o);
        if (*table) return cmd_table(o);
        return cmd_evaluate(o);
    } catch (const parameter_error& e) {
        std::cerr << "hsiband: usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hsiband: error: " << e.what() << '\n';
        return 1;
    }
}
