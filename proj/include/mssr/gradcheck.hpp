#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mssr/model.hpp"

namespace mssr {

enum class InjectedBug { none, bias, weight };

struct GradCheckOptions {
    std::uint64_t seed = 1;
    double step = 1e-4;
    double tolerance = 1e-4;
    /// Denominator floor of the relative error, so gradients that are
    /// numerically zero are compared in absolute terms.
    double error_floor = 1e-6;
    ModelConfig model{9, 2, 2, 8};
    std::size_t input_size = 7;
    std::size_t batch = 3;
    /// 0 checks every parameter; otherwise a seeded subset per layer.
    std::size_t max_coords_per_layer = 0;
    /// Test hook: corrupts one analytic gradient after the backward pass.
    InjectedBug inject = InjectedBug::none;
    bool run_tensor = true;
    bool run_model = true;
    bool run_trainer = true;
};

struct GradCheckEntry {
    std::string suite;
    std::string name;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    /// Coordinates whose central-difference stencil flips a ReLU mask.
    std::size_t skipped = 0;
};

struct GradCheckReport {
    double tolerance = 1e-4;
    std::vector<GradCheckEntry> entries;

    double worst() const;
    bool passed() const { return worst() < tolerance; }
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Central finite differences in 64-bit against the analytic gradients of the
/// convolution and ReLU primitives, the full model and the training loss.
GradCheckReport run_grad_check(const GradCheckOptions& options);

/// Only the model suite: per-layer entries for 0.5 * ||F(x) - target||^2 on
/// a random 1 x 1 x input_size x input_size input.
GradCheckReport check_model_gradients(const GradCheckOptions& options);

}  // namespace mssr
