#include "uavad/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavad/errors.hpp"

namespace uavad {

namespace {
constexpr double kSigmaFloor = 1e-12;
}

NormalizationParams fit_zscore(const FrameSeries& frames) {
    const std::size_t n = frames.frame_count();
    const std::size_t d = frames.feature_count();
    if (n < 2) throw DataError("z-score fit needs at least 2 frames, got " + std::to_string(n));

    NormalizationParams p;
    p.feature_names = frames.feature_names;
    p.mean.assign(d, 0.0);
    p.stddev.assign(d, 0.0);

    for (std::size_t r = 0; r < n; ++r) axpy(1.0, frames.frames.row(r), p.mean);
    for (double& m : p.mean) m /= static_cast<double>(n);

    for (std::size_t r = 0; r < n; ++r) {
        auto row = frames.frames.row(r);
        for (std::size_t c = 0; c < d; ++c) {
            const double dv = row[c] - p.mean[c];
            p.stddev[c] += dv * dv;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        p.stddev[c] = std::sqrt(p.stddev[c] / static_cast<double>(n));
        if (p.stddev[c] < kSigmaFloor)
            throw DataError("feature '" + frames.feature_names[c] +
                            "' has near-zero variance; it should have been rejected upstream");
    }
    return p;
}

FrameSeries apply_zscore(const FrameSeries& frames, const NormalizationParams& params) {
    if (frames.feature_names != params.feature_names)
        throw DataError("z-score feature names do not match the fitted params (flight " +
                        frames.flight_id + ")");
    FrameSeries out = frames;
    for (std::size_t r = 0; r < out.frame_count(); ++r) {
        auto row = out.frames.row(r);
        for (std::size_t c = 0; c < row.size(); ++c)
            row[c] = (row[c] - params.mean[c]) / params.stddev[c];
    }
    return out;
}

SymmetricEigen jacobi_eigen(const Matrix& sym) {
    const std::size_t n = sym.rows();
    if (n == 0 || sym.cols() != n) throw DataError("jacobi_eigen requires a square matrix");

    Matrix a = sym;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    auto off_norm = [&a, n]() {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
        return std::sqrt(2.0 * s);
    };

    const double scale = std::max(1.0, off_norm());
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && off_norm() > 1e-15 * scale; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

namespace {

struct FittedPca {
    PcaModel full;  // all input_dim components
};

FittedPca fit_full_pca(const FrameSeries& frames) {
    const std::size_t n = frames.frame_count();
    const std::size_t d = frames.feature_count();
    if (n <= d) throw DataError("PCA fit needs more frames than features (" + std::to_string(n) +
                                " frames, " + std::to_string(d) + " features)");

    PcaModel m;
    m.input_dim = d;
    m.input_mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) axpy(1.0, frames.frames.row(r), m.input_mean);
    for (double& x : m.input_mean) x /= static_cast<double>(n);

    Matrix cov(d, d);
    Vec centred(d);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = frames.frames.row(r);
        for (std::size_t c = 0; c < d; ++c) centred[c] = row[c] - m.input_mean[c];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) cov(i, j) += centred[i] * centred[j];
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(n);
            cov(j, i) = cov(i, j);
        }

    m.total_variance = 0.0;
    for (std::size_t i = 0; i < d; ++i) m.total_variance += cov(i, i);

    SymmetricEigen eig = jacobi_eigen(cov);
    for (double& ev : eig.values) ev = std::max(ev, 0.0);

    // Sign convention: largest-magnitude entry of each component positive,
    // so serialized models do not depend on rotation phase.
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs(eig.vectors(i, j)) > best) {
                best = std::abs(eig.vectors(i, j));
                arg = i;
            }
        }
        if (eig.vectors(arg, j) < 0.0)
            for (std::size_t i = 0; i < d; ++i) eig.vectors(i, j) = -eig.vectors(i, j);
    }

    m.k = d;
    m.components = eig.vectors;
    m.explained_variance = eig.values;
    return {std::move(m)};
}

PcaModel truncate(PcaModel full, std::size_t k) {
    if (k == full.input_dim) return full;
    PcaModel m;
    m.input_dim = full.input_dim;
    m.k = k;
    m.input_mean = full.input_mean;
    m.total_variance = full.total_variance;
    m.components = Matrix(full.input_dim, k);
    for (std::size_t i = 0; i < full.input_dim; ++i)
        for (std::size_t j = 0; j < k; ++j) m.components(i, j) = full.components(i, j);
    m.explained_variance.assign(full.explained_variance.begin(),
                                full.explained_variance.begin() + static_cast<std::ptrdiff_t>(k));
    return m;
}

}  // namespace

PcaModel fit_pca(const FrameSeries& frames, std::size_t k) {
    const std::size_t d = frames.feature_count();
    if (k == 0) throw DataError("PCA target dimension must be positive");
    if (k > d) throw DataError("PCA target dimension " + std::to_string(k) + " exceeds input dimension " +
                               std::to_string(d));
    return truncate(fit_full_pca(frames).full, k);
}

PcaModel fit_pca_variance_target(const FrameSeries& frames, double target) {
    if (!(target > 0.0 && target <= 1.0)) throw DataError("variance target must lie in (0, 1]");
    PcaModel full = fit_full_pca(frames).full;
    if (full.total_variance <= 0.0) throw NumericError("total variance is zero; cannot pick components");
    double cum = 0.0;
    std::size_t k = full.input_dim;
    for (std::size_t j = 0; j < full.input_dim; ++j) {
        cum += full.explained_variance[j];
        if (cum / full.total_variance >= target) {
            k = j + 1;
            break;
        }
    }
    return truncate(std::move(full), k);
}

FrameSeries apply_pca(const FrameSeries& frames, const PcaModel& model) {
    if (frames.feature_count() != model.input_dim)
        throw DataError("PCA input dimension mismatch: frames have " +
                        std::to_string(frames.feature_count()) + " features, model expects " +
                        std::to_string(model.input_dim));

    FrameSeries out;
    out.flight_id = frames.flight_id;
    out.timestamps = frames.timestamps;
    out.labels = frames.labels;
    out.feature_names.reserve(model.k);
    for (std::size_t j = 0; j < model.k; ++j) out.feature_names.push_back("pc" + std::to_string(j));

    out.frames = Matrix(frames.frame_count(), model.k);
    Vec centred(model.input_dim);
    for (std::size_t r = 0; r < frames.frame_count(); ++r) {
        auto row = frames.frames.row(r);
        for (std::size_t c = 0; c < model.input_dim; ++c) centred[c] = row[c] - model.input_mean[c];
        for (std::size_t j = 0; j < model.k; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < model.input_dim; ++i) s += model.components(i, j) * centred[i];
            out.frames(r, j) = s;
        }
    }
    return out;
}

std::vector<double> variance_report(const PcaModel& model) {
    if (model.total_variance <= 0.0) throw NumericError("total variance is zero");
    std::vector<double> out;
    out.reserve(model.k);
    double cum = 0.0;
    for (std::size_t j = 0; j < model.k; ++j) {
        cum += model.explained_variance[j];
        out.push_back(std::clamp(cum / model.total_variance, 0.0, 1.0));
    }
    return out;
}

}  // namespace uavad
