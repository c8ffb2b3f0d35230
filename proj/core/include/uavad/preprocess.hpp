#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uavad/ingest.hpp"
#include "uavad/linalg.hpp"

namespace uavad {

// Per-feature standardisation constants fitted on the training flights.
// Test flights are always transformed with the training-set params.
struct NormalizationParams {
    std::vector<std::string> feature_names;
    Vec mean;
    Vec stddev;  // population form (denominator n), floor-checked at fit
};

NormalizationParams fit_zscore(const FrameSeries& frames);
FrameSeries apply_zscore(const FrameSeries& frames, const NormalizationParams& params);

struct PcaModel {
    std::size_t input_dim = 0;
    std::size_t k = 0;
    Matrix components;        // input_dim x k, orthonormal columns, eigenvalue-descending
    Vec input_mean;           // stored even when fit on centred data
    Vec explained_variance;   // top-k eigenvalues of the sample covariance
    double total_variance = 0.0;  // trace of the covariance (sum over all dims)
};

// Covariance uses denominator n to match the Z-score convention. The
// eigensolver is cyclic Jacobi (deterministic); each component is flipped
// so its largest-magnitude entry is positive.
PcaModel fit_pca(const FrameSeries& frames, std::size_t k);

// Variance-target alternative: fits all components, then keeps the
// smallest k whose cumulative explained-variance ratio reaches target.
PcaModel fit_pca_variance_target(const FrameSeries& frames, double target);

// Projects rows onto the components; output features are named pc0..pc(k-1).
FrameSeries apply_pca(const FrameSeries& frames, const PcaModel& model);

// Cumulative explained-variance ratios, clamped to [0, 1].
std::vector<double> variance_report(const PcaModel& model);

struct SymmetricEigen {
    Vec values;      // descending
    Matrix vectors;  // columns aligned with values
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
SymmetricEigen jacobi_eigen(const Matrix& sym);

}  // namespace uavad
