#include "cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cli/config.hpp"
#include "zefoz/decoherence.hpp"
#include "zefoz/error.hpp"
#include "zefoz/spectrum.hpp"
#include "zefoz/zefoz_search.hpp"

namespace zefoz::cli {

namespace {

struct Common {
    std::string config_path;
    std::string out_path;
    int workers = 0;
    std::optional<std::string> convention;
};

// Destination for the primary output: a file when --out is set, otherwise
// the caller's stream. A relative --out is placed under $ZEFOZ_OUTPUT_DIR
// when that variable is set.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        std::filesystem::path p(path);
        if (p.is_relative()) {
            if (const char* dir = std::getenv("ZEFOZ_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
        }
        file_.open(p);
        if (!file_) throw Error(ErrorKind::usage, "cannot open output file '" + p.string() + "'");
        stream_ = &file_;
    }
    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

int worker_count(int requested) {
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
    std::string t = text;
    for (auto& c : t)
        if (c == ',') c = ' ';
    std::istringstream in(t);
    Vec3 v;
    if (!(in >> v[0] >> v[1] >> v[2])) throw Error(ErrorKind::usage, what + " must be three numbers like 732,173,-219");
    std::string rest;
    if (in >> rest) throw Error(ErrorKind::usage, what + " must be exactly three numbers");
    return v;
}

std::string fmt_num(double v) { return fmt::format("{:.12g}", v); }
std::string fmt_vec(const Vec3& v) { return fmt::format("{:.12g},{:.12g},{:.12g}", v[0], v[1], v[2]); }

void write_metadata(std::ostream& os, const std::string& command, const SystemConfig& config) {
    fmt::print(os, "# zefoz {}\n", command);
    fmt::print(os, "# config_hash: {}\n", config.hash());
    if (!config.name.empty()) fmt::print(os, "# config_name: {}\n", config.name);
    fmt::print(os, "# euler_convention: {}\n", to_string(config.tensors.convention));
    fmt::print(os, "# units: field=G energy=MHz gradient=MHz/G hessian=MHz/G^2\n");
}

LoadedSystem load(const Common& common) {
    if (common.config_path.empty()) throw Error(ErrorKind::usage, "--config is required");
    return instantiate(with_convention(load_config(common.config_path), common.convention));
}

std::vector<Field> read_path_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::usage, "cannot read path file '" + path + "'");
    std::vector<Field> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_of("0123456789") == std::string::npos) continue;  // header
        if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        out.push_back(parse_vec3(line, "path file row"));
    }
    return out;
}

struct PathOptions {
    std::string from = "0,0,0";
    std::string to;
    int points = 100;
    std::string file;
};

void add_path_options(CLI::App* cmd, PathOptions& p) {
    cmd->add_option("--from", p.from, "Start field Bx,By,Bz in G")->capture_default_str();
    cmd->add_option("--to", p.to, "End field Bx,By,Bz in G");
    cmd->add_option("--points", p.points, "Number of path points")->capture_default_str();
    cmd->add_option("--path-file", p.file, "CSV of Bx,By,Bz rows instead of --from/--to");
}

std::vector<Field> build_path(const PathOptions& p, std::size_t minimum) {
    std::vector<Field> path;
    if (!p.file.empty()) {
        path = read_path_file(p.file);
    } else {
        if (p.points < static_cast<int>(minimum) || p.points < 1)
            throw Error(ErrorKind::usage, fmt::format("path needs at least {} points", std::max<std::size_t>(minimum, 1)));
        if (p.points == 1) {
            path = {parse_vec3(p.from, "--from")};
        } else {
            if (p.to.empty()) throw Error(ErrorKind::usage, "give --to (and optionally --from, --points) or --path-file");
            path = straight_path(parse_vec3(p.from, "--from"), parse_vec3(p.to, "--to"), p.points);
        }
    }
    if (path.size() < minimum) throw Error(ErrorKind::usage, fmt::format("path needs at least {} points", minimum));
    for (const auto& b : path) check_field(b);
    return path;
}

// "lo,hi" or a zero-field label such as "+1/2<->+3/2"
struct TransitionSpec {
    std::optional<Transition> indices;
    std::optional<std::string> label;
};

TransitionSpec parse_transition(const std::string& text, int dim) {
    TransitionSpec spec;
    if (text.find('/') != std::string::npos) {
        parse_transition_label(text);  // validates the syntax early
        spec.label = text;
        return spec;
    }
    std::string t = text;
    for (auto& c : t)
        if (c == ',' || c == ':') c = ' ';
    std::istringstream in(t);
    Transition tr;
    if (!(in >> tr.lo >> tr.hi)) throw Error(ErrorKind::usage, "transition must be 'lo,hi' or a label like +1/2<->+3/2");
    spec.indices = normalized(tr, dim);
    return spec;
}

Transition resolve(const TransitionSpec& spec, const SpinHamiltonian& h, const Field& b) {
    if (spec.indices) return *spec.indices;
    if (b.norm() == 0.0) throw Error(ErrorKind::usage, "transition labels cannot be resolved at B = 0; use lo,hi");
    return resolve_transition_label(h, b, *spec.label);
}

std::string transition_label_at(const SpinHamiltonian& h, const Field& b, const Transition& tr) {
    try {
        const auto labels = adiabatic_labels(h, b);
        return format_transition_label(labels[static_cast<std::size_t>(tr.lo)], labels[static_cast<std::size_t>(tr.hi)]);
    } catch (const Error&) {
        return "";
    }
}

bool same_label(const std::string& a, const std::string& b) {
    const auto [a1, a2] = parse_transition_label(a);
    const auto [b1, b2] = parse_transition_label(b);
    return (a1 == b1 && a2 == b2) || (a1 == b2 && a2 == b1);
}

// ---------------------------------------------------------------- levels

int cmd_levels(const Common& common, const PathOptions& popt, const std::string& site_text, std::ostream& out) {
    const auto sys = load(common);
    const auto path = build_path(popt, 2);
    if (site_text != "a" && site_text != "b") throw Error(ErrorKind::usage, "--site must be a or b");
    const Site site = site_text == "a" ? Site::a : Site::b;
    const SpinHamiltonian h(sys.spin, tensors_for_site(sys.tensors, site, sys.config.c2_axis));
    const auto map = level_map(h, path);

    Sink sink(common.out_path, out);
    auto& os = sink.stream();
    write_metadata(os, "levels", sys.config);
    fmt::print(os, "# site: {}\n", to_string(site));
    int ambiguous = 0;
    for (bool a : map.ambiguous) ambiguous += a ? 1 : 0;
    fmt::print(os, "# ambiguous_segments: {}\n", ambiguous);
    os << "Bx,By,Bz";
    for (int i = 0; i < sys.spin.dim; ++i) fmt::print(os, ",E_{}", i);
    os << '\n';
    for (std::size_t p = 0; p < path.size(); ++p) {
        os << fmt_vec(path[p]);
        for (Eigen::Index i = 0; i < map.energies[p].size(); ++i) os << ',' << fmt_num(map.energies[p][i]);
        os << '\n';
    }
    return kSuccess;
}

// -------------------------------------------------------------- spectrum

int cmd_spectrum(const Common& common, const PathOptions& popt, const std::string& rf, double fmin, double fmax,
                 std::ostream& out) {
    const auto sys = load(common);
    const auto path = build_path(popt, 1);
    const FrequencyWindow window{fmin, fmax};
    const auto table = spectrum_vs_field(sys.spin, sys.tensors, path, parse_vec3(rf, "--rf"), window, sys.config.c2_axis);

    Sink sink(common.out_path, out);
    auto& os = sink.stream();
    write_metadata(os, "spectrum", sys.config);
    fmt::print(os, "# rf_direction: {}\n", fmt_vec(parse_vec3(rf, "--rf")));
    fmt::print(os, "# window_MHz: {},{}\n", fmt_num(fmin), fmt_num(fmax));
    int amb_a = 0, amb_b = 0;
    for (bool a : table.ambiguous_a) amb_a += a ? 1 : 0;
    for (bool a : table.ambiguous_b) amb_b += a ? 1 : 0;
    fmt::print(os, "# ambiguous_segments: a={} b={}\n", amb_a, amb_b);
    os << "point_index,Bx,By,Bz,subsite,lo,hi,freq_MHz,intensity\n";
    for (const auto& r : table.rows) {
        fmt::print(os, "{},{},{},{},{},{},{}\n", r.point_index, fmt_vec(r.b), to_string(r.subsite), r.lo, r.hi,
                   fmt_num(r.frequency), fmt_num(r.intensity));
    }
    return kSuccess;
}

// ----------------------------------------------------------- sensitivity

void print_sensitivity(std::ostream& os, const TransitionSensitivity& s, const Transition& tr, const std::string& label,
                       double flat_threshold) {
    fmt::print(os, "transition: {},{}\n", tr.lo, tr.hi);
    if (!label.empty()) fmt::print(os, "label: {}\n", label);
    fmt::print(os, "frequency_MHz: {}\n", fmt_num(s.frequency));
    fmt::print(os, "gradient_MHz_per_G: {:.6e},{:.6e},{:.6e}\n", s.gradient[0], s.gradient[1], s.gradient[2]);
    fmt::print(os, "gradient_norm_MHz_per_G: {:.6e}\n", s.gradient_norm());
    const auto& e = s.hessian_eigen;
    fmt::print(os, "hessian_eigenvalues_MHz_per_G2: {:.6e},{:.6e},{:.6e}\n", e.values[0], e.values[1], e.values[2]);
    for (int k = 0; k < 3; ++k) {
        fmt::print(os, "hessian_axis_{}: {:.6f},{:.6f},{:.6f}\n", k + 1, e.axes(0, k), e.axes(1, k), e.axes(2, k));
    }
    fmt::print(os, "classification: {}\n", to_string(classify(e.values, flat_threshold)));
    fmt::print(os, "degeneracy_flag: {}\n", s.degeneracy_flag);
    fmt::print(os, "finite_difference: {}\n", s.finite_difference);
}

int cmd_sensitivity(const Common& common, const std::string& transition, const std::string& field_text,
                    double flat_threshold, std::ostream& out) {
    const auto sys = load(common);
    const Field b = parse_vec3(field_text, "--field");
    check_field(b);
    const auto spec = parse_transition(transition, sys.spin.dim);

    Sink sink(common.out_path, out);
    auto& os = sink.stream();
    write_metadata(os, "sensitivity", sys.config);
    fmt::print(os, "field_G: {}\n", fmt_vec(b));
    double norms[2] = {0.0, 0.0};
    for (Site site : {Site::a, Site::b}) {
        const SpinHamiltonian h(sys.spin, tensors_for_site(sys.tensors, site, sys.config.c2_axis));
        const Transition tr = resolve(spec, h, b);
        const auto s = sensitivity(h, b, tr);
        norms[static_cast<int>(site)] = s.gradient_norm();
        fmt::print(os, "\n[site {}]\n", to_string(site));
        print_sensitivity(os, s, tr, b.norm() > 0.0 ? transition_label_at(h, b, tr) : "", flat_threshold);
    }
    fmt::print(os, "\n[subsite comparison]\n");
    if (norms[0] > 0.0) {
        fmt::print(os, "gradient_norm_ratio_b_over_a: {:.6e}\n", norms[1] / norms[0]);
    } else {
        fmt::print(os, "gradient_norm_ratio_b_over_a: inf\n");
    }
    return kSuccess;
}

// ---------------------------------------------------------------- search

struct SearchOptions {
    std::string transition;
    double half_width = 1500.0;
    std::string lower;
    std::string upper;
    SearchBox box;
    std::string report_path;
};

int cmd_search(const Common& common, SearchOptions opt, std::ostream& out) {
    const auto sys = load(common);
    SearchBox box = opt.box;
    box.lower = opt.lower.empty() ? Vec3::Constant(-opt.half_width) : parse_vec3(opt.lower, "--lower");
    box.upper = opt.upper.empty() ? Vec3::Constant(opt.half_width) : parse_vec3(opt.upper, "--upper");
    box.c2_axis = sys.config.c2_axis;
    box.workers = worker_count(common.workers);
    validate(box);
    const auto spec = parse_transition(opt.transition, sys.spin.dim);

    std::vector<CriticalPoint> points;
    if (spec.indices) {
        points = find_all(sys.spin, sys.tensors, *spec.indices, box);
    } else {
        // a zero-field label can name a different index pair at every
        // field, so search all pairs and keep the points it names
        std::vector<Transition> all;
        for (int lo = 0; lo < sys.spin.dim; ++lo)
            for (int hi = lo + 1; hi < sys.spin.dim; ++hi) all.push_back(Transition{lo, hi, std::nullopt});
        const SpinHamiltonian ha(sys.spin, sys.tensors);
        const SpinHamiltonian hb(sys.spin, subsite_transform(sys.tensors, box.c2_axis));
        for (auto& p : find_all_transitions(sys.spin, sys.tensors, all, box)) {
            const std::string label = transition_label_at(p.subsite == Site::a ? ha : hb, p.b, p.transition);
            if (!label.empty() && same_label(label, *spec.label)) {
                p.transition.label = label;
                points.push_back(p);
            }
        }
    }
    for (auto& p : points) {
        if (!p.transition.label) {
            const SpinHamiltonian h(sys.spin, tensors_for_site(sys.tensors, p.subsite, box.c2_axis));
            const auto label = transition_label_at(h, p.b, p.transition);
            if (!label.empty()) p.transition.label = label;
        }
    }

    {
        Sink sink(common.out_path, out);
        auto& os = sink.stream();
        write_metadata(os, "search", sys.config);
        fmt::print(os, "# transition: {}\n", opt.transition);
        fmt::print(os, "# box_G: lower={} upper={} step={}\n", fmt_vec(box.lower), fmt_vec(box.upper), fmt_num(box.grid_step));
        fmt::print(os, "# newton_tol_MHz_per_G: {}\n", fmt_num(box.newton_tol));
        fmt::print(os, "# ranking: curvature_score = max |hessian eigenvalue|\n");
        os << "Bx,By,Bz,freq_MHz,grad_norm,lambda1,lambda2,lambda3,class,subsite,iterations,lo,hi,label\n";
        for (const auto& p : points) {
            fmt::print(os, "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{},{},{},{}\n", fmt_vec(p.b), fmt_num(p.frequency),
                       p.gradient_norm, p.hessian_eigenvalues[0], p.hessian_eigenvalues[1], p.hessian_eigenvalues[2],
                       to_string(p.classification), to_string(p.subsite), p.iterations, p.transition.lo, p.transition.hi,
                       p.transition.label.value_or(""));
        }
    }
    if (!opt.report_path.empty()) {
        Sink sink(opt.report_path, out);
        auto& os = sink.stream();
        write_metadata(os, "search report", sys.config);
        fmt::print(os, "points: {}\n", points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            fmt::print(os, "\n[point {}]\n", i + 1);
            fmt::print(os, "Bx: {}\nBy: {}\nBz: {}\n", fmt_num(p.b[0]), fmt_num(p.b[1]), fmt_num(p.b[2]));
            fmt::print(os, "freq_MHz: {}\n", fmt_num(p.frequency));
            fmt::print(os, "grad_norm: {:.6e}\n", p.gradient_norm);
            for (int k = 0; k < 3; ++k) {
                fmt::print(os, "lambda{}: {:.6e}\n", k + 1, p.hessian_eigenvalues[k]);
                fmt::print(os, "axis{}: {:.6f},{:.6f},{:.6f}\n", k + 1, p.hessian_axes(0, k), p.hessian_axes(1, k),
                           p.hessian_axes(2, k));
            }
            fmt::print(os, "curvature_score: {:.6e}\n", p.curvature_score);
            fmt::print(os, "class: {}\n", to_string(p.classification));
            fmt::print(os, "subsite: {}\n", to_string(p.subsite));
            fmt::print(os, "iterations: {}\n", p.iterations);
            fmt::print(os, "transition: {},{}\n", p.transition.lo, p.transition.hi);
            if (p.transition.label) fmt::print(os, "label: {}\n", *p.transition.label);
        }
    }
    return kSuccess;
}

// ------------------------------------------------------------------- fit

std::vector<DecayPoint> read_decay_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::usage, "cannot read data file '" + path + "'");
    std::vector<DecayPoint> data;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::string t = line;
        for (auto& c : t)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream row(t);
        DecayPoint p;
        if (!(row >> p.t >> p.intensity)) {
            if (data.empty()) continue;  // header line
            throw Error(ErrorKind::usage, fmt::format("{}:{}: expected two numeric columns", path, lineno));
        }
        data.push_back(p);
    }
    if (data.empty()) throw Error(ErrorKind::usage, "data file '" + path + "' contains no data points");
    return data;
}

std::vector<std::string> parameter_names(DecayKind kind) {
    switch (kind) {
        case DecayKind::exponential: return {"I0", "T2_s"};
        case DecayKind::mims_quadratic: return {"I0", "TM_s"};
        case DecayKind::biexponential: return {"A_fast", "tau_fast_s", "A_slow", "tau_slow_s"};
    }
    return {};
}

int cmd_fit(const Common& common, const std::string& data_path, const std::string& model, const std::string& curve_path,
            int curve_points, std::ostream& out) {
    const DecayKind kind = parse_decay_kind(model);
    const auto data = read_decay_csv(data_path);
    const auto result = fit(data, kind);
    const auto names = parameter_names(kind);
    {
        Sink sink(common.out_path, out);
        auto& os = sink.stream();
        fmt::print(os, "# zefoz fit\n");
        fmt::print(os, "# units: time=s\n");
        fmt::print(os, "model: {}\n", to_string(kind));
        fmt::print(os, "points: {}\n", data.size());
        for (std::size_t i = 0; i < names.size(); ++i) fmt::print(os, "{}: {:.9g}\n", names[i], result.model.params[i]);
        fmt::print(os, "residual_rms: {:.9g}\n", result.residual_rms);
        for (std::size_t i = 0; i < names.size(); ++i) fmt::print(os, "var_{}: {:.6e}\n", names[i], result.covariance_diag[i]);
        fmt::print(os, "converged: {}\n", result.converged);
        fmt::print(os, "iterations: {}\n", result.iterations);
    }
    if (!curve_path.empty()) {
        Sink sink(curve_path, out);
        auto& os = sink.stream();
        fmt::print(os, "# zefoz fit curve\n# model: {}\nt_s,intensity\n", to_string(kind));
        const auto times = linear_times(data.front().t, data.back().t, std::max(2, curve_points));
        for (double t : times) fmt::print(os, "{:.9g},{:.9g}\n", t, evaluate(result.model, t));
    }
    return result.converged ? kSuccess : kNumericalFailure;
}

// -------------------------------------------------------------- generate

struct GenerateOptions {
    std::string model = "exponential";
    std::string params;
    double t0 = 0.0;
    double t1 = 0.0;
    int points = 30;
    std::string spacing = "linear";
    double noise = 0.0;
    std::uint64_t seed = 1;
};

int cmd_generate(const Common& common, const GenerateOptions& g, std::ostream& out) {
    const DecayKind kind = parse_decay_kind(g.model);
    std::vector<double> values;
    {
        std::string t = g.params;
        for (auto& c : t)
            if (c == ',') c = ' ';
        std::istringstream in(t);
        double v;
        while (in >> v) values.push_back(v);
    }
    if (static_cast<int>(values.size()) != parameter_count(kind))
        throw Error(ErrorKind::usage, fmt::format("--params needs {} values for a {} model", parameter_count(kind), to_string(kind)));
    DecayModel m{kind, {}};
    for (std::size_t i = 0; i < values.size(); ++i) m.params[i] = values[i];
    m.validate();
    if (!(g.t1 > g.t0)) throw Error(ErrorKind::usage, "--t1 must exceed --t0");
    std::vector<double> times;
    if (g.spacing == "linear") {
        times = linear_times(g.t0, g.t1, g.points);
    } else if (g.spacing == "log") {
        times = log_times(g.t0, g.t1, g.points);
    } else {
        throw Error(ErrorKind::usage, "--spacing must be linear or log");
    }
    const auto data = generate(m, times, g.noise, g.seed);

    Sink sink(common.out_path, out);
    auto& os = sink.stream();
    fmt::print(os, "# zefoz generate\n");
    fmt::print(os, "# model: {}\n", to_string(kind));
    const auto names = parameter_names(kind);
    for (std::size_t i = 0; i < names.size(); ++i) fmt::print(os, "# {}: {:.9g}\n", names[i], m.params[i]);
    fmt::print(os, "# noise_fraction: {:.9g}\n", g.noise);
    fmt::print(os, "# seed: {}\n", g.seed);
    os << "t_s,intensity\n";
    for (const auto& p : data) fmt::print(os, "{:.9g},{:.12g}\n", p.t, p.intensity);
    return kSuccess;
}

int exit_code_for(const Error& e) {
    return e.kind() == ErrorKind::non_convergence ? kNumericalFailure : kUsageError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"zefoz: spin Hamiltonian levels, spectra, ZEFOZ critical points and echo decay fits"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", common.config_path, "System configuration (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--out", common.out_path, "Write the primary output to this file");
        cmd->add_option("--workers", common.workers, "Worker threads (default: available parallelism)");
        cmd->add_option("--convention", common.convention, "Euler convention override");
    };

    PathOptions path_opt;
    std::string site = "a";
    auto* levels = app.add_subcommand("levels", "Energy levels along a field path (CSV)");
    add_common(levels, true);
    add_path_options(levels, path_opt);
    levels->add_option("--site", site, "Subsite a or b")->capture_default_str();

    std::string rf = "1,0,0";
    double fmin = 0.0, fmax = 100.0;
    auto* spectrum = app.add_subcommand("spectrum", "Transition spectrum along a field path (long CSV)");
    add_common(spectrum, true);
    add_path_options(spectrum, path_opt);
    spectrum->add_option("--rf", rf, "RF field direction")->capture_default_str();
    spectrum->add_option("--fmin", fmin, "Lower window edge, MHz")->capture_default_str();
    spectrum->add_option("--fmax", fmax, "Upper window edge, MHz")->capture_default_str();

    std::string transition;
    std::string field;
    double flat = SearchBox{}.flat_threshold;
    auto* sens = app.add_subcommand("sensitivity", "Frequency, gradient and curvature of one transition");
    add_common(sens, true);
    sens->add_option("--transition", transition, "lo,hi or a zero-field label like +1/2<->+3/2")->required();
    sens->add_option("--field", field, "Field Bx,By,Bz in G")->required();
    sens->add_option("--flat", flat, "Quasi-flat curvature threshold, MHz/G^2")->capture_default_str();

    SearchOptions sopt;
    auto* search = app.add_subcommand("search", "ZEFOZ critical points of one transition, both subsites");
    add_common(search, true);
    search->add_option("--transition", sopt.transition, "lo,hi or a zero-field label like +1/2<->+3/2")->required();
    search->add_option("--half-width", sopt.half_width, "Symmetric box half-width, G")->capture_default_str();
    search->add_option("--lower", sopt.lower, "Box lower corner Bx,By,Bz (overrides --half-width)");
    search->add_option("--upper", sopt.upper, "Box upper corner Bx,By,Bz (overrides --half-width)");
    search->add_option("--step", sopt.box.grid_step, "Grid step, G")->capture_default_str();
    search->add_option("--tol", sopt.box.newton_tol, "Newton tolerance on |grad f|, MHz/G")->capture_default_str();
    search->add_option("--max-iters", sopt.box.max_iters, "Newton iteration limit")->capture_default_str();
    search->add_option("--dedupe", sopt.box.dedupe_radius, "Dedupe radius, G")->capture_default_str();
    search->add_option("--exclusion", sopt.box.exclusion_radius, "No seeds within this |B|, G")->capture_default_str();
    search->add_option("--flat", sopt.box.flat_threshold, "Quasi-flat curvature threshold, MHz/G^2")->capture_default_str();
    search->add_option("--report", sopt.report_path, "Also write a structured text report here");

    std::string data_path, model = "exponential", curve_path;
    int curve_points = 200;
    auto* fitcmd = app.add_subcommand("fit", "Least-squares fit of an echo decay");
    add_common(fitcmd, false);
    fitcmd->add_option("--data", data_path, "Two-column CSV: seconds, intensity")->required();
    fitcmd->add_option("--model", model, "exponential, mims_quadratic or biexponential")->capture_default_str();
    fitcmd->add_option("--curve", curve_path, "Write the fitted curve as CSV");
    fitcmd->add_option("--curve-points", curve_points, "Points in the fitted curve")->capture_default_str();

    GenerateOptions gopt;
    auto* gen = app.add_subcommand("generate", "Synthetic echo decay data with multiplicative noise");
    add_common(gen, false);
    gen->add_option("--model", gopt.model, "exponential, mims_quadratic or biexponential")->capture_default_str();
    gen->add_option("--params", gopt.params, "Model parameters, comma separated (seconds)")->required();
    gen->add_option("--t0", gopt.t0, "First time, s")->required();
    gen->add_option("--t1", gopt.t1, "Last time, s")->required();
    gen->add_option("--points", gopt.points, "Number of samples")->capture_default_str();
    gen->add_option("--spacing", gopt.spacing, "linear or log")->capture_default_str();
    gen->add_option("--noise", gopt.noise, "Relative Gaussian noise")->capture_default_str();
    gen->add_option("--seed", gopt.seed, "Generator seed")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsageError;
    }

    try {
        if (levels->parsed()) return cmd_levels(common, path_opt, site, out);
        if (spectrum->parsed()) return cmd_spectrum(common, path_opt, rf, fmin, fmax, out);
        if (sens->parsed()) return cmd_sensitivity(common, transition, field, flat, out);
        if (search->parsed()) return cmd_search(common, sopt, out);
        if (fitcmd->parsed()) return cmd_fit(common, data_path, model, curve_path, curve_points, out);
        if (gen->parsed()) return cmd_generate(common, gopt, out);
    } catch (const Error& e) {
        fmt::print(err, "error ({}): {}\n", to_string(e.kind()), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace zefoz::cli
