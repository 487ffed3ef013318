#include "hipad/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hipad/error.hpp"
#include "hipad/random.hpp"
#include "hipad/synthetic.hpp"

namespace hipad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string millis(double seconds)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", seconds);
    return buf;
}

enum class Mode { hipad, hipad_enk, admm_only };

// Solver flags shared by `train` and `cv`.
struct SolverFlags {
    std::string data;
    std::string knowledge;
    std::optional<std::size_t> features;
    std::string mode = "auto";
    EnkParams admm;
    std::optional<double> rho;
    std::optional<double> mu;
    std::optional<double> mu1, mu2;
    std::optional<double> rho1, rho2, rho3, rho4;
    std::optional<double> svm_cost;
    std::optional<double> p2_rho1, p2_rho2, p2_rho3, p2_rho4;
    SvmDualConfig ipm;
    std::uint64_t seed = 1;
};

void add_solver_options(CLI::App* cmd, SolverFlags& f)
{
    cmd->add_option("--data", f.data, "Training data (LIBSVM)")->required();
    cmd->add_option("--knowledge", f.knowledge, "Knowledge file; selects hipad-enk in auto mode");
    cmd->add_option("--features", f.features, "Feature count (default: largest index, or the knowledge width)");
    cmd->add_option("--mode", f.mode, "auto, hipad, hipad-enk or admm-only")
        ->check(CLI::IsMember({"auto", "hipad", "hipad-enk", "admm-only"}))
        ->capture_default_str();
    cmd->add_option("--lambda1", f.admm.lambda1, "L1 weight")->capture_default_str();
    cmd->add_option("--lambda2", f.admm.lambda2, "Ridge weight")->capture_default_str();
    cmd->add_option("--mu1", f.mu1, "Penalty on the hinge split (default " + format_double(f.admm.mu1) + ")");
    cmd->add_option("--mu2", f.mu2, "Penalty on the L1 split (default " + format_double(f.admm.mu2) + ")");
    cmd->add_option("--mu", f.mu, "Sets every ADMM penalty mu1..mu6; --mu1/--mu2 override it");
    cmd->add_option("--rho", f.rho, "Sets rho1..rho4; --rho1..--rho4 override it");
    cmd->add_option("--rho1", f.rho1, "Positive-rule quadratic weight (default " + format_double(f.admm.rho1) + ")");
    cmd->add_option("--rho2", f.rho2, "Positive-rule hinge weight (default " + format_double(f.admm.rho2) + ")");
    cmd->add_option("--rho3", f.rho3, "Negative-rule quadratic weight (default " + format_double(f.admm.rho3) + ")");
    cmd->add_option("--rho4", f.rho4, "Negative-rule hinge weight (default " + format_double(f.admm.rho4) + ")");
    cmd->add_option("--eps1", f.admm.eps1, "Objective and feasibility tolerance")->capture_default_str();
    cmd->add_option("--eps2", f.admm.eps2, "Relative iterate tolerance")->capture_default_str();
    cmd->add_option("--eps-tol", f.admm.eps_tol, "Phase-1 transition tolerance")->capture_default_str();
    cmd->add_option("--patience", f.admm.transition_patience, "Iterations the transition test must hold")
        ->capture_default_str();
    cmd->add_option("--max-iter", f.admm.max_iter, "ADMM iteration cap")->capture_default_str();
    cmd->add_option("--svm-cost", f.svm_cost, "Phase-2 hinge weight (default 1/(N lambda2))");
    cmd->add_option("--p2-rho1", f.p2_rho1, "Phase-2 rho1 (default: --rho1)");
    cmd->add_option("--p2-rho2", f.p2_rho2, "Phase-2 rho2 (default: --rho2)");
    cmd->add_option("--p2-rho3", f.p2_rho3, "Phase-2 rho3 (default: --rho3)");
    cmd->add_option("--p2-rho4", f.p2_rho4, "Phase-2 rho4 (default: --rho4)");
    cmd->add_option("--ipm-tol", f.ipm.kkt_tol, "Interior-point KKT tolerance")->capture_default_str();
    cmd->add_option("--ipm-max-iter", f.ipm.max_iter, "Interior-point iteration cap")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Seed for fold assignment (recorded in metrics)")->capture_default_str();
}

HipadConfig build_config(const SolverFlags& f)
{
    HipadConfig cfg;
    cfg.admm = f.admm;
    if (f.rho) cfg.admm.rho1 = cfg.admm.rho2 = cfg.admm.rho3 = cfg.admm.rho4 = *f.rho;
    if (f.mu) {
        cfg.admm.mu1 = cfg.admm.mu2 = *f.mu;
        cfg.admm.mu3 = cfg.admm.mu4 = cfg.admm.mu5 = cfg.admm.mu6 = *f.mu;
    }
    if (f.mu1) cfg.admm.mu1 = *f.mu1;
    if (f.mu2) cfg.admm.mu2 = *f.mu2;
    if (f.rho1) cfg.admm.rho1 = *f.rho1;
    if (f.rho2) cfg.admm.rho2 = *f.rho2;
    if (f.rho3) cfg.admm.rho3 = *f.rho3;
    if (f.rho4) cfg.admm.rho4 = *f.rho4;
    cfg.ipm = f.ipm;
    cfg.svm_cost = f.svm_cost;
    if (f.p2_rho1 || f.p2_rho2 || f.p2_rho3 || f.p2_rho4) {
        cfg.phase2_knowledge = KsvmPrimalParams{f.p2_rho1.value_or(cfg.admm.rho1), f.p2_rho2.value_or(cfg.admm.rho2),
                                                f.p2_rho3.value_or(cfg.admm.rho3), f.p2_rho4.value_or(cfg.admm.rho4)};
    }
    cfg.validate();
    return cfg;
}

Mode resolve_mode(const std::string& name, bool has_knowledge)
{
    if (name == "auto") return has_knowledge ? Mode::hipad_enk : Mode::hipad;
    if (name == "hipad") return Mode::hipad;
    if (name == "hipad-enk") {
        if (!has_knowledge) throw InvalidArgument("mode hipad-enk needs --knowledge");
        return Mode::hipad_enk;
    }
    return Mode::admm_only;
}

struct TrainingInput {
    DataMatrix data;
    std::optional<KnowledgeSet> knowledge;
};

TrainingInput load_training_input(const SolverFlags& f)
{
    TrainingInput in;
    std::optional<KnowledgeSet> knowledge;
    if (!f.knowledge.empty()) knowledge = read_knowledge(f.knowledge);
    LibsvmReadOptions opts;
    opts.features = f.features;
    if (!opts.features && knowledge) opts.features = knowledge->features();
    opts.labeled = true;
    in.data = read_libsvm(f.data, opts);
    if (knowledge && knowledge->features() != in.data.features()) {
        throw DimensionError("knowledge has " + std::to_string(knowledge->features()) + " features, data has " +
                             std::to_string(in.data.features()));
    }
    in.knowledge = std::move(knowledge);
    return in;
}

SvmModel train_with(Mode mode, const TrainingInput& in, HipadConfig cfg)
{
    if (mode == Mode::admm_only) cfg.skip_phase2 = true;
    if (in.knowledge && mode != Mode::hipad) return hipad_enk_train(in.data, *in.knowledge, cfg);
    return hipad_train(in.data, cfg);
}

KeyValues config_echo(const SolverFlags& f, Mode mode, const HipadConfig& cfg, std::size_t samples)
{
    KeyValues kv;
    static constexpr const char* names[] = {"hipad", "hipad-enk", "admm-only"};
    kv.set("mode", std::string(names[static_cast<int>(mode)]));
    kv.set("data", f.data);
    kv.set("knowledge", f.knowledge);
    const EnkParams& p = cfg.admm;
    kv.set("lambda1", p.lambda1);
    kv.set("lambda2", p.lambda2);
    kv.set("mu1", p.mu1);
    kv.set("mu2", p.mu2);
    kv.set("mu3", p.mu3);
    kv.set("mu4", p.mu4);
    kv.set("mu5", p.mu5);
    kv.set("mu6", p.mu6);
    kv.set("rho1", p.rho1);
    kv.set("rho2", p.rho2);
    kv.set("rho3", p.rho3);
    kv.set("rho4", p.rho4);
    kv.set("eps1", p.eps1);
    kv.set("eps2", p.eps2);
    kv.set("eps_tol", p.eps_tol);
    kv.set_int("patience", p.transition_patience);
    kv.set_int("max_iter", p.max_iter);
    kv.set("svm_cost", cfg.phase2_config(samples).svm_cost);
    const KsvmPrimalParams k2 = cfg.phase2_knowledge_params();
    kv.set("p2_rho1", k2.rho1);
    kv.set("p2_rho2", k2.rho2);
    kv.set("p2_rho3", k2.rho3);
    kv.set("p2_rho4", k2.rho4);
    kv.set("ipm_tol", cfg.ipm.kkt_tol);
    kv.set_int("ipm_max_iter", cfg.ipm.max_iter);
    kv.set("seed", std::to_string(f.seed));
    return kv;
}

RunMetrics metrics_for(const SvmModel& model, double total_seconds)
{
    RunMetrics m;
    m.support_size = model.support.size();
    m.phase1_iterations = model.phase1_iterations;
    m.phase2_iterations = model.phase2_iterations;
    m.phase1_seconds = model.phase1_seconds;
    m.phase2_seconds = model.phase2_seconds;
    m.total_seconds = total_seconds;
    m.origin = std::string(to_string(model.origin));
    m.phase1_reason = model.phase1_reason;
    return m;
}

// Writes every (path, contents) pair, or none of them if one fails.
void write_outputs(const std::vector<std::pair<std::string, std::string>>& files)
{
    std::vector<std::string> done;
    try {
        for (const auto& [path, contents] : files) {
            if (path.empty()) continue;
            write_file_atomic(path, contents);
            done.push_back(path);
        }
    } catch (...) {
        std::error_code ignored;
        for (const auto& p : done) std::filesystem::remove(p, ignored);
        throw;
    }
}

template <class F>
std::string render(F&& f)
{
    std::ostringstream out;
    f(out);
    return out.str();
}

void print_warnings(const SvmModel& model, std::ostream& err)
{
    for (const auto& w : model.warnings) err << "warning: " << w << '\n';
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    SolverFlags solver;
    std::string test;
    std::string model_out;
    std::string metrics_out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err)
{
    const TrainingInput in = load_training_input(a.solver);
    std::optional<DataMatrix> test;
    if (!a.test.empty()) {
        LibsvmReadOptions opts;
        opts.labeled = true;
        test = read_libsvm(a.test, opts);
    }
    const Mode mode = resolve_mode(a.solver.mode, in.knowledge.has_value());
    const HipadConfig cfg = build_config(a.solver);

    const auto t0 = Clock::now();
    const SvmModel model = train_with(mode, in, cfg);
    const double total = seconds_since(t0);
    print_warnings(model, err);

    RunMetrics m = metrics_for(model, total);
    if (test) {
        m.accuracy = accuracy_percent(predict(model, *test), test->y());
        m.accuracy_on = "test";
    } else {
        m.accuracy = accuracy_percent(predict(model, in.data), in.data.y());
        m.accuracy_on = "train";
    }
    m.config = config_echo(a.solver, mode, cfg, in.data.samples());

    write_outputs({{a.model_out, render([&](std::ostream& o) { write_model(o, model); })},
                   {a.metrics_out, render([&](std::ostream& o) { write_key_values(o, m.to_key_values()); })}});
    write_key_values(out, m.to_key_values());
    return exit_ok;
}

// -------------------------------------------------------------- predict

struct PredictArgs {
    std::string model;
    std::string data;
    std::string output;
    std::string metrics_out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out)
{
    const SvmModel model = read_model(a.model);
    const DataMatrix data = read_libsvm(a.data);
    const Vector labels = predict(model, data);
    const std::string text = render([&](std::ostream& o) {
        for (double l : labels) o << (l > 0 ? "+1" : "-1") << '\n';
    });
    std::optional<double> accuracy;
    if (!data.y().empty()) accuracy = accuracy_percent(labels, data.y());

    KeyValues kv;
    if (accuracy) kv.set("accuracy", *accuracy);
    kv.set_int("samples", static_cast<long long>(data.samples()));
    write_outputs({{a.output, text}, {a.metrics_out, render([&](std::ostream& o) { write_key_values(o, kv); })}});
    if (a.output.empty()) out << text;
    if (accuracy) out << "accuracy=" << format_double(*accuracy) << '\n';
    return exit_ok;
}

// ------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string model;
    std::string data;
    std::string metrics_out;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out)
{
    const SvmModel model = read_model(a.model);
    LibsvmReadOptions opts;
    opts.labeled = true;
    const DataMatrix data = read_libsvm(a.data, opts);
    const Vector labels = predict(model, data);

    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    const auto y = data.y();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (y[i] > 0) (labels[i] > 0 ? tp : fn)++;
        else (labels[i] > 0 ? fp : tn)++;
    }
    KeyValues kv;
    kv.set("accuracy", accuracy_percent(labels, y));
    kv.set_int("support_size", static_cast<long long>(model.support.size()));
    kv.set_int("samples", static_cast<long long>(data.samples()));
    kv.set_int("true_positive", static_cast<long long>(tp));
    kv.set_int("true_negative", static_cast<long long>(tn));
    kv.set_int("false_positive", static_cast<long long>(fp));
    kv.set_int("false_negative", static_cast<long long>(fn));
    write_outputs({{a.metrics_out, render([&](std::ostream& o) { write_key_values(o, kv); })}});
    write_key_values(out, kv);
    return exit_ok;
}

// ------------------------------------------------------------- generate

struct GenerateArgs {
    std::string preset = "ksvm-s-10k";
    std::uint64_t seed = 1;
    std::string out_dir;
    std::optional<std::size_t> n_train, n_test, m, block_length, support;
    std::optional<double> shift;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out)
{
    namespace fs = std::filesystem;
    const fs::path dir(a.out_dir);
    std::vector<std::pair<std::string, std::string>> files;
    std::size_t n_train = 0, n_test = 0, m = 0;

    if (a.preset == "planted") {
        PlantedSpec spec;
        spec.seed = a.seed;
        if (a.n_train) spec.n_train = *a.n_train;
        if (a.n_test) spec.n_test = *a.n_test;
        if (a.m) spec.m = *a.m;
        if (a.support) spec.support = *a.support;
        if (a.shift) spec.shift = *a.shift;
        const PlantedDataset ds = generate_planted_sparse(spec);
        KeyValues meta;
        meta.set("generator", std::string("planted-sparse"));
        meta.set("rng", std::string("mt19937_64"));
        meta.set("seed", std::to_string(spec.seed));
        meta.set_int("n_train", static_cast<long long>(spec.n_train));
        meta.set_int("n_test", static_cast<long long>(spec.n_test));
        meta.set_int("m", static_cast<long long>(spec.m));
        meta.set_int("support", static_cast<long long>(spec.support));
        meta.set("shift", spec.shift);
        std::string planted;
        for (std::size_t k = 0; k < ds.support.size(); ++k) planted += (k ? "," : "") + std::to_string(ds.support[k]);
        meta.set("planted_features", planted);
        files = {{(dir / "train.libsvm").string(), render([&](std::ostream& o) { write_libsvm(o, ds.train); })},
                 {(dir / "test.libsvm").string(), render([&](std::ostream& o) { write_libsvm(o, ds.test); })},
                 {(dir / "meta.txt").string(), render([&](std::ostream& o) { write_key_values(o, meta); })}};
        n_train = spec.n_train;
        n_test = spec.n_test;
        m = spec.m;
    } else {
        SyntheticSpec spec = SyntheticSpec::preset(a.preset, a.seed);
        if (a.n_train) spec.n_train = *a.n_train;
        if (a.n_test) spec.n_test = *a.n_test;
        if (a.m) spec.m = *a.m;
        if (a.block_length) spec.block_length = *a.block_length;
        const SyntheticDataset ds = generate_knowledge_synthetic(spec);
        files = {{(dir / "train.libsvm").string(), render([&](std::ostream& o) { write_libsvm(o, ds.train); })},
                 {(dir / "test.libsvm").string(), render([&](std::ostream& o) { write_libsvm(o, ds.test); })},
                 {(dir / "knowledge.txt").string(), render([&](std::ostream& o) { write_knowledge(o, ds.knowledge); })},
                 {(dir / "meta.txt").string(),
                  render([&](std::ostream& o) { write_key_values(o, synthetic_metadata(spec)); })}};
        n_train = spec.n_train;
        n_test = spec.n_test;
        m = spec.m;
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + a.out_dir + "'");
    write_outputs(files);
    out << "wrote " << files.size() << " files to " << a.out_dir << " (n_train=" << n_train << ", n_test=" << n_test
        << ", m=" << m << ")\n";
    return exit_ok;
}

// ------------------------------------------------------------------- cv

struct CvArgs {
    SolverFlags solver;
    std::size_t folds = 5;
    std::vector<double> lambda1_grid;
    std::vector<double> lambda2_grid;
    std::vector<double> rho_grid;
    std::string table_out;
    std::string model_out;
    std::string metrics_out;
};

/// fold[i] in [0, k): a seeded shuffle dealt round-robin.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> fold(n);
    for (std::size_t r = 0; r < n; ++r) fold[order[r]] = r % k;
    return fold;
}

int cmd_cv(const CvArgs& a, std::ostream& out, std::ostream& err)
{
    const TrainingInput in = load_training_input(a.solver);
    const std::size_t n = in.data.samples();
    if (a.folds < 2) throw InvalidArgument("--folds must be at least 2");
    if (a.folds > n) {
        throw InvalidArgument("--folds " + std::to_string(a.folds) + " exceeds the sample count " + std::to_string(n));
    }
    const Mode mode = resolve_mode(a.solver.mode, in.knowledge.has_value());
    const std::vector<double> l1s = a.lambda1_grid.empty() ? std::vector<double>{a.solver.admm.lambda1} : a.lambda1_grid;
    const std::vector<double> l2s = a.lambda2_grid.empty() ? std::vector<double>{a.solver.admm.lambda2} : a.lambda2_grid;
    std::vector<std::optional<double>> rhos;
    if (a.rho_grid.empty()) {
        rhos.push_back(a.solver.rho);
    } else {
        for (double r : a.rho_grid) rhos.emplace_back(r);
    }

    const std::vector<std::size_t> fold = assign_folds(n, a.folds, a.solver.seed);
    std::vector<KeyValues> table;
    double best_acc = -1.0;
    SolverFlags best = a.solver;

    for (double l1 : l1s) {
        for (double l2 : l2s) {
            for (const auto& rho : rhos) {
                SolverFlags f = a.solver;
                f.admm.lambda1 = l1;
                f.admm.lambda2 = l2;
                f.rho = rho;
                const HipadConfig cfg = build_config(f);
                double sum = 0.0;
                for (std::size_t k = 0; k < a.folds; ++k) {
                    std::vector<std::size_t> tr, va;
                    for (std::size_t i = 0; i < n; ++i) (fold[i] == k ? va : tr).push_back(i);
                    TrainingInput part{in.data.select_samples(tr), in.knowledge};
                    const DataMatrix held = in.data.select_samples(va);
                    const SvmModel model = train_with(mode, part, cfg);
                    sum += accuracy_percent(predict(model, held), held.y());
                }
                const double acc = sum / static_cast<double>(a.folds);
                KeyValues row;
                row.set("lambda1", l1);
                row.set("lambda2", l2);
                row.set("rho", rho ? format_double(*rho) : std::string("-"));
                row.set("mean_accuracy", acc);
                table.push_back(std::move(row));
                if (acc > best_acc) {
                    best_acc = acc;
                    best = f;
                }
            }
        }
    }

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back(a.table_out, render([&](std::ostream& o) { write_table(o, table); }));
    KeyValues summary;
    if (!a.model_out.empty() || !a.metrics_out.empty()) {
        const HipadConfig cfg = build_config(best);
        const auto t0 = Clock::now();
        const SvmModel model = train_with(mode, in, cfg);
        const double total = seconds_since(t0);
        print_warnings(model, err);
        RunMetrics m = metrics_for(model, total);
        m.accuracy = best_acc;
        m.accuracy_on = "cv";
        m.config = config_echo(best, mode, cfg, n);
        summary = m.to_key_values();
        files.emplace_back(a.model_out, render([&](std::ostream& o) { write_model(o, model); }));
        files.emplace_back(a.metrics_out, render([&](std::ostream& o) { write_key_values(o, summary); }));
    }
    write_outputs(files);

    write_table(out, table);
    out << "best: lambda1=" << format_double(best.admm.lambda1) << " lambda2=" << format_double(best.admm.lambda2);
    if (best.rho) out << " rho=" << format_double(*best.rho);
    out << " mean_accuracy=" << format_double(best_acc) << '\n';
    return exit_ok;
}

} // namespace

KeyValues RunMetrics::to_key_values() const
{
    KeyValues kv;
    if (accuracy) {
        kv.set("accuracy", *accuracy);
        kv.set("accuracy_on", accuracy_on);
    }
    kv.set_int("support_size", static_cast<long long>(support_size));
    kv.set_int("phase1_iterations", phase1_iterations);
    kv.set_int("phase2_iterations", phase2_iterations);
    kv.set("phase1_time", millis(phase1_seconds));
    kv.set("phase2_time", millis(phase2_seconds));
    kv.set("total_time", millis(total_seconds));
    kv.set("origin", origin);
    kv.set("phase1_reason", phase1_reason);
    for (const auto& [k, v] : config.entries()) kv.set("config." + k, v);
    return kv;
}

RunMetrics RunMetrics::from_key_values(const KeyValues& kv)
{
    RunMetrics m;
    if (kv.contains("accuracy")) {
        m.accuracy = kv.get_double("accuracy");
        m.accuracy_on = kv.get("accuracy_on");
    }
    const long long support = kv.get_int("support_size");
    if (support < 0) throw ParseError("support_size must be nonnegative", 0);
    m.support_size = static_cast<std::size_t>(support);
    m.phase1_iterations = static_cast<int>(kv.get_int("phase1_iterations"));
    m.phase2_iterations = static_cast<int>(kv.get_int("phase2_iterations"));
    m.phase1_seconds = kv.get_double("phase1_time");
    m.phase2_seconds = kv.get_double("phase2_time");
    m.total_seconds = kv.get_double("total_time");
    m.origin = kv.get("origin");
    m.phase1_reason = kv.get("phase1_reason");
    for (const auto& [k, v] : kv.entries()) {
        if (k.rfind("config.", 0) == 0) m.config.set(k.substr(7), v);
    }
    return m;
}

bool is_timing_key(const std::string& key)
{
    return key == "phase1_time" || key == "phase2_time" || key == "total_time";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-phase elastic-net SVM training (ADMM support detection, interior-point refinement)", "hipad"};
    app.require_subcommand(1);

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write it with its metrics");
    add_solver_options(train_cmd, train.solver);
    train_cmd->add_option("--test", train.test, "Labeled test data; metrics then report test accuracy");
    train_cmd->add_option("--model", train.model_out, "Output model file")->required();
    train_cmd->add_option("--metrics", train.metrics_out, "Output metrics file (key=value)");

    PredictArgs pred;
    CLI::App* predict_cmd = app.add_subcommand("predict", "Label samples with a trained model");
    predict_cmd->add_option("--model", pred.model, "Model file")->required();
    predict_cmd->add_option("--data", pred.data, "Samples (LIBSVM, labels optional)")->required();
    predict_cmd->add_option("--output", pred.output, "Label file (default: standard output)");
    predict_cmd->add_option("--metrics", pred.metrics_out, "Output metrics file");

    EvaluateArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Score a model on labeled data");
    eval_cmd->add_option("--model", eval.model, "Model file")->required();
    eval_cmd->add_option("--data", eval.data, "Labeled samples (LIBSVM)")->required();
    eval_cmd->add_option("--metrics", eval.metrics_out, "Output metrics file");

    GenerateArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
    gen_cmd->add_option("--preset", gen.preset, "ksvm-s-10k, ksvm-s-50k or planted")
        ->check(CLI::IsMember({"ksvm-s-10k", "ksvm-s-50k", "planted"}))
        ->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
    gen_cmd->add_option("--n-train", gen.n_train, "Override the training sample count");
    gen_cmd->add_option("--n-test", gen.n_test, "Override the test sample count");
    gen_cmd->add_option("--m", gen.m, "Override the feature count");
    gen_cmd->add_option("--block-length", gen.block_length, "Override the block length (knowledge presets)");
    gen_cmd->add_option("--support", gen.support, "Planted support size (planted preset)");
    gen_cmd->add_option("--shift", gen.shift, "Planted mean shift (planted preset)");

    CvArgs cv;
    CLI::App* cv_cmd = app.add_subcommand("cv", "Grid search by k-fold cross-validation");
    add_solver_options(cv_cmd, cv.solver);
    cv_cmd->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
    cv_cmd->add_option("--lambda1-grid", cv.lambda1_grid, "Comma-separated lambda1 values")->delimiter(',');
    cv_cmd->add_option("--lambda2-grid", cv.lambda2_grid, "Comma-separated lambda2 values")->delimiter(',');
    cv_cmd->add_option("--rho-grid", cv.rho_grid, "Comma-separated values for rho1..rho4")->delimiter(',');
    cv_cmd->add_option("--table", cv.table_out, "Output table (tab-separated)");
    cv_cmd->add_option("--model", cv.model_out, "Retrain on all data with the best point and write the model");
    cv_cmd->add_option("--metrics", cv.metrics_out, "Metrics of the retrained model");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train, out, err);
        if (predict_cmd->parsed()) return cmd_predict(pred, out);
        if (eval_cmd->parsed()) return cmd_evaluate(eval, out);
        if (gen_cmd->parsed()) return cmd_generate(gen, out);
        if (cv_cmd->parsed()) return cmd_cv(cv, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_solver;
    }
    return exit_usage;
}

} // namespace hipad
