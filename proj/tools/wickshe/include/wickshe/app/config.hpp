#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wickshe/basis.hpp"
#include "wickshe/chaos.hpp"
#include "wickshe/kernels.hpp"

namespace wickshe::app {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InitialSpec {
    std::string tag = "constant";  // constant | sine | gaussian_bump | tanh
    double value = 1.0;
    double amplitude = 1.0;
    double frequency = 1.0;
    double width = 1.0;
    double scale = 1.0;

    [[nodiscard]] InitialCondition build() const;
};

struct RunConfig {
    std::uint64_t seed = 0;
    TruncationSpec truncation{4, 6};

    struct Quadrature {
        double L = 0.0;  // 0 = max|x| + 6 sqrt(T) + 6 from the probes
        int panels = 64;
        double grading = 2.0;
        int time_points = 24;
        int gh_nodes = 64;
    } quadrature;

    struct Propagator {
        double dx = 0.05;
        double dt = 0.005;
        double L = 12.0;
        bool richardson = true;
    } propagator;

    struct Mc {
        double dt = 1e-3;
        std::int64_t n_paths = 100000;
        double delta_a_factor = 2.0;
        std::int64_t block_size = 1024;
    } mc;

    InitialSpec initial_condition;
    std::vector<SpaceTimePoint> probes{{1.0, 0.0}, {0.5, 0.3}};
    std::string output_dir = "wickshe-out";

    struct Chaos {
        std::string method = "auto";  // auto | quadrature | propagator
        double tolerance = 1e-3;      // relative, quadrature vs propagator
    } chaos;

    struct Derivative {
        std::string method = "auto";
        double epsilon = 0.2;
        std::vector<double> lambdas{0.0, 1.0};
        double cauchy_tolerance = 0.01;
    } derivative;

    struct Fk {
        std::int64_t noise_draws = 200;
        std::int64_t paths_per_draw = 2000;
        std::int64_t psi_noise_draws = 100000;
    } fk;

    struct STransform {
        double mode_scale = 0.5;
        double bump_amplitude = 0.5;
        double bump_center = 0.3;
        double bump_width = 1.0;
    } stransform;

    struct Equivalence {
        double y_min = -1.0;
        double y_max = 1.0;
        int grid = 5;
        int time_points = 32;
        int max_order = 2;
        double tolerance = 1e-3;
    } equivalence;

    struct LocalTime {
        double t = 1.0;
        std::vector<double> h_values{0.05, 0.1, 0.2};
        std::vector<double> extra_t{0.5};
    } localtime;

    struct Regularity {
        double h_min = 0.0078125;
        double h_max = 0.125;
        int points = 9;
        double space_t = 0.2;
        double time_base = 0.0;
        double informational_base = 0.25;
        double max_top_order_share = 0.05;
    } regularity;

    // Resolved spatial truncation for the semigroup quadrature.
    [[nodiscard]] double resolved_L() const;
    [[nodiscard]] QuadratureGrid grid() const;
    [[nodiscard]] ChaosQuadratureOptions quadrature_options() const;
};

// Parses the INI-like format: `[section]` headers, `key = value` lines,
// `#` comments. Keys may also be written fully dotted at top level.
[[nodiscard]] RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
[[nodiscard]] RunConfig parse_config(const std::filesystem::path& path);

// Every key with its resolved value, in a fixed order.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& cfg);

// The set of accepted keys, for diagnostics and tests.
[[nodiscard]] std::vector<std::string> config_keys();

}  // namespace wickshe::app
