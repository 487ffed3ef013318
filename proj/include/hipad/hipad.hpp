#pragma once

// Two-phase training: ADMM until the feature support settles, then an
// interior-point solve restricted to that support.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hipad/admm.hpp"
#include "hipad/data.hpp"
#include "hipad/ipm.hpp"

namespace hipad {

enum class ModelOrigin { hipad, hipad_enk, admm_only };

std::string_view to_string(ModelOrigin origin);
/// Inverse of to_string; throws InvalidArgument on unknown names.
ModelOrigin model_origin_from_string(std::string_view name);

/// A linear classifier stored sparsely in original feature coordinates.
struct SvmModel {
    /// Original feature indices, strictly increasing.
    std::vector<std::size_t> support;
    /// weights[k] belongs to feature support[k].
    Vector weights;
    double bias = 0.0;

    ModelOrigin origin = ModelOrigin::admm_only;
    int phase1_iterations = 0;
    int phase2_iterations = 0;
    double phase1_seconds = 0.0;
    double phase2_seconds = 0.0;
    /// How Phase 1 ended ("transition", "converged", "iteration-limit").
    std::string phase1_reason;
    std::vector<std::string> warnings;

    /// Throws InvalidArgument unless support is strictly increasing and matches weights in length.
    void validate() const;
    /// Weight of an original feature (0 off the support).
    double weight(std::size_t feature) const;
    /// w^T x_i + b for row i; features beyond the model contribute nothing.
    double decision(const SparseMatrix& x, std::size_t row) const;
};

struct HipadConfig {
    /// Phase-1 ADMM parameters. Plain (knowledge-free) training reads only
    /// the elastic-net fields; `admm.max_iter` caps Phase 1.
    EnkParams admm;
    /// Phase-2 interior-point settings. `ipm.svm_cost` is ignored unless
    /// `svm_cost` below is set.
    SvmDualConfig ipm;
    /// Phase-2 hinge penalty; defaults to 1 / (N * lambda2).
    std::optional<double> svm_cost;
    /// Phase-2 knowledge weights; defaults to the Phase-1 rho's.
    std::optional<KsvmPrimalParams> phase2_knowledge;
    /// Return the ADMM model run to convergence, without Phase 2.
    bool skip_phase2 = false;

    void validate() const;
    /// The effective Phase-2 configuration for a training set of `samples` rows.
    SvmDualConfig phase2_config(std::size_t samples) const;
    KsvmPrimalParams phase2_knowledge_params() const;
};

/// Elastic-net SVM through ADMM (Phase 1) and the SVM dual (Phase 2).
SvmModel hipad_train(const DataMatrix& data, const HipadConfig& cfg, const TraceCallback& trace = {});

/// Knowledge-augmented variant: ADMM-ENK, then the knowledge primal on the support.
SvmModel hipad_enk_train(const DataMatrix& data, const KnowledgeSet& knowledge, const HipadConfig& cfg,
                         const TraceCallback& trace = {});

/// Labels sign(w^T x + b) in {-1, +1}; a zero decision value maps to +1.
Vector predict(const SvmModel& model, const DataMatrix& samples);

/// Percentage of positions where the two label vectors agree.
double accuracy_percent(std::span<const double> predicted, std::span<const double> truth);

/// Builds a model from a dense weight vector, keeping its nonzero entries.
SvmModel model_from_dense(std::span<const double> w, double b, ModelOrigin origin);

} // namespace hipad
