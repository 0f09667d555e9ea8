// Checks against the expected clock field B = (732, 173, -219) G and the
// expected 8.63 MHz site-a +1/2<->+3/2 transition.
#include <doctest.h>

#include <sstream>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "zefoz/spectrum.hpp"
#include "zefoz/spin_algebra.hpp"
#include "zefoz/zefoz_search.hpp"

using namespace zefoz;

namespace {

const Field kClockField(732, 173, -219);
constexpr double kClockFrequency = 8.63;
constexpr const char* kClockLabel = "+1/2<->+3/2";

const SpinSystem& spin52() {
    static const SpinSystem sys = make_spin_system(5);
    return sys;
}

const SpinHamiltonian& site_a() {
    static const SpinHamiltonian h(spin52(), build_tensors(pr_yso_site1()));
    return h;
}

const SpinHamiltonian& site_b() {
    static const SpinHamiltonian h(spin52(), subsite_transform(build_tensors(pr_yso_site1())));
    return h;
}

Transition clock_transition() { return resolve_transition_label(site_a(), kClockField, kClockLabel); }

bool within_5g(const Field& a, const Field& b) { return (a - b).cwiseAbs().maxCoeff() <= 5.0; }

}  // namespace

TEST_CASE("clock transition frequency at the expected field") {
    const auto tr = clock_transition();
    CHECK(transition_frequency(site_a(), kClockField, tr) == doctest::Approx(kClockFrequency).epsilon(0.05 / 8.63));
}

TEST_CASE("zero first order Zeeman shift at the expected field") {
    const auto s = sensitivity(site_a(), kClockField, clock_transition());
    CHECK(s.gradient_norm() < 1e-5);
    CHECK(s.frequency == doctest::Approx(kClockFrequency).epsilon(0.05 / 8.63));
}

TEST_CASE("site b is far from a critical point at the expected field") {
    const auto tr = clock_transition();
    const auto a = sensitivity(site_a(), kClockField, tr);
    const auto b = sensitivity(site_b(), kClockField, tr);
    CHECK(b.gradient_norm() > 1e3 * a.gradient_norm());
}

TEST_CASE("turning point in y and z with a slow inflection along x") {
    const auto s = sensitivity(site_a(), kClockField, clock_transition());
    const Vec3 mags = s.hessian_eigen.values.cwiseAbs();
    int flat = 0;
    mags.minCoeff(&flat);
    const Vec3 axis = s.hessian_eigen.axes.col(flat);
    CHECK(std::abs(axis[0]) > std::cos(30.0 * std::numbers::pi / 180.0));
    for (int k = 0; k < 3; ++k)
        if (k != flat) CHECK(mags[k] >= 10.0 * mags[flat]);
}

TEST_CASE("clock transition tracks to the 1/2 and 3/2 doublets") {
    const auto tr = clock_transition();
    const auto labels = adiabatic_labels(site_a(), kClockField);
    CHECK(std::abs(labels[static_cast<std::size_t>(tr.lo)]) + std::abs(labels[static_cast<std::size_t>(tr.hi)]) == 4);
    CHECK(transition_frequency(site_a(), kClockField, tr) == doctest::Approx(kClockFrequency).epsilon(0.05 / 8.63));
}

TEST_CASE("grid minima, refinement and ranking around the expected field") {
    const auto tr = clock_transition();
    SearchBox box;
    const auto grid = scan_gradient_norm(site_a(), tr, box);
    double best = 1e300;
    Field seed = Field::Zero();
    for (const auto& g : grid) {
        if (!g.gradient_norm) continue;
        if ((g.b - kClockField).norm() < 100.0 && *g.gradient_norm < best) {
            best = *g.gradient_norm;
            seed = g.b;
        }
    }
    const auto r = refine_critical_point(site_a(), tr, seed, box, Site::a);
    CHECK(r.converged);
    CHECK(within_5g(r.point.b, kClockField));
    CHECK(r.point.frequency == doctest::Approx(kClockFrequency).epsilon(0.05 / 8.63));

    const auto all = find_all(spin52(), build_tensors(pr_yso_site1()), tr, box);
    const auto near = std::find_if(all.begin(), all.end(), [](const auto& p) {
        return p.subsite == Site::a && within_5g(p.b, kClockField);
    });
    const auto mirror = std::find_if(all.begin(), all.end(), [](const auto& p) {
        return p.subsite == Site::a && within_5g(p.b, -kClockField);
    });
    CHECK(near != all.end());
    CHECK(mirror != all.end());
    if (near != all.end()) {
        for (const auto& p : all)
            if (p.subsite == Site::a) CHECK(near->curvature_score <= p.curvature_score);
    }
}

TEST_CASE("spectrum at the expected field shows the 8.63 MHz site a line") {
    const auto lines =
        lines_at(spin52(), build_tensors(pr_yso_site1()), kClockField, Vec3::UnitX(), FrequencyWindow{0.0, 20.0});
    int count_a = 0, count_b = 0;
    bool clock_line = false;
    for (const auto& l : lines) {
        (l.subsite == Site::a ? count_a : count_b)++;
        if (l.subsite == Site::a && std::abs(l.frequency - kClockFrequency) <= 0.05) clock_line = true;
    }
    CHECK(count_a == 15);
    CHECK(count_b == 15);
    CHECK(clock_line);
}

TEST_CASE("command line search for the labelled clock transition") {
    std::ostringstream out, err;
    const int code = cli::run({"zefoz", "search", "--config", std::string(ZEFOZ_SOURCE_DIR) + "/configs/site1_pr_yso.json",
                               "--transition", kClockLabel, "--half-width", "1500", "--step", "50"},
                              out, err);
    REQUIRE(code == 0);
    bool found = false;
    std::istringstream in(out.str());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'B') continue;
        Field b;
        double f = 0.0;
        char comma;
        std::istringstream row(line);
        row >> b[0] >> comma >> b[1] >> comma >> b[2] >> comma >> f;
        const bool site_a = line.find(",a,") != std::string::npos;
        if (site_a && within_5g(b, kClockField) && std::abs(f - kClockFrequency) <= 0.05) found = true;
    }
    CHECK(found);
}

TEST_CASE("command line sensitivity at the expected field") {
    std::ostringstream out, err;
    const int code = cli::run({"zefoz", "sensitivity", "--config",
                               std::string(ZEFOZ_SOURCE_DIR) + "/configs/site1_pr_yso.json", "--transition", kClockLabel,
                               "--field", "732,173,-219"},
                              out, err);
    REQUIRE(code == 0);
    const std::string text = out.str();
    const auto pos = text.find("gradient_norm_MHz_per_G: ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(text.substr(pos + 25)) < 1e-5);
}
