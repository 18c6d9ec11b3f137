#include "ovkit/classifiers.hpp"

#include "classifiers_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ovkit {

namespace {

constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);
constexpr std::size_t kCacheBytes = 256ull * 1024 * 1024;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// Lazily materialized rows of the RBF kernel matrix with least-recently-used
// eviction. At least two rows stay resident, so a span fetched immediately
// before another row() call remains valid.
class KernelCache {
public:
    KernelCache(const Matrix& x, double gamma, std::size_t max_bytes)
        : x_(x), gamma_(gamma), n_(x.rows) {
        sq_norms_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            sq_norms_[i] = dot(x_.row(i), x_.row(i));
        }
        const std::size_t row_bytes = std::max<std::size_t>(1, n_ * sizeof(double));
        std::size_t max_rows = std::max<std::size_t>(2, max_bytes / row_bytes);
        max_rows = std::min(max_rows, n_);
        max_rows = std::max<std::size_t>(max_rows, 2);
        slots_.resize(max_rows);
        slot_row_.assign(max_rows, kNoIndex);
        last_used_.assign(max_rows, 0);
        slot_of_.assign(n_, kNoIndex);
    }

    std::span<const double> row(std::size_t i) {
        ++tick_;
        std::size_t s = slot_of_[i];
        if (s == kNoIndex) {
            s = acquire_slot();
            if (slot_row_[s] != kNoIndex) {
                slot_of_[slot_row_[s]] = kNoIndex;
            }
            slot_row_[s] = i;
            slot_of_[i] = s;
            fill_row(i, slots_[s]);
        }
        last_used_[s] = tick_;
        return slots_[s];
    }

private:
    std::size_t acquire_slot() {
        std::size_t oldest = 0;
        std::uint64_t oldest_tick = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t s = 0; s < slots_.size(); ++s) {
            if (slot_row_[s] == kNoIndex) {
                return s;
            }
            if (last_used_[s] < oldest_tick) {
                oldest_tick = last_used_[s];
                oldest = s;
            }
        }
        return oldest;
    }

    void fill_row(std::size_t i, std::vector<double>& out) {
        out.resize(n_);
        const auto xi = x_.row(i);
        for (std::size_t j = 0; j < n_; ++j) {
            const double d2 =
                std::max(0.0, sq_norms_[i] + sq_norms_[j] - 2.0 * dot(xi, x_.row(j)));
            out[j] = std::exp(-gamma_ * d2);
        }
    }

    const Matrix& x_;
    double gamma_;
    std::size_t n_;
    std::vector<double> sq_norms_;
    std::vector<std::vector<double>> slots_;
    std::vector<std::size_t> slot_row_;
    std::vector<std::uint64_t> last_used_;
    std::vector<std::size_t> slot_of_;
    std::uint64_t tick_ = 0;
};

// Seeds dual coefficients from an earlier model: training rows that exactly
// match an old support vector reuse its coefficient (clamped to the current
// box), everything else starts at zero. The equality constraint
// sum_i alpha_i y_i = 0 is then restored by shrinking coefficients on the
// heavier side, lowest index first.
void warm_start_alphas(const Matrix& x, std::span<const int> y, double c,
                       const SvmRbfClassifier& prior, std::vector<double>& alpha) {
    std::map<std::vector<double>, double> prior_dual;
    for (std::size_t k = 0; k < prior.support_vectors.rows; ++k) {
        const auto sv = prior.support_vectors.row(k);
        prior_dual[std::vector<double>(sv.begin(), sv.end())] = prior.dual_coeffs[k];
    }

    std::vector<double> probe;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto xi = x.row(i);
        probe.assign(xi.begin(), xi.end());
        const auto it = prior_dual.find(probe);
        if (it != prior_dual.end()) {
            // old dual is alpha*y; recover alpha under the current label
            alpha[i] = std::clamp(it->second * static_cast<double>(y[i]), 0.0, c);
        }
    }

    for (int round = 0; round < 2; ++round) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            s += alpha[i] * static_cast<double>(y[i]);
        }
        for (std::size_t i = 0; i < x.rows && s != 0.0; ++i) {
            if (s > 0.0 && y[i] == 1 && alpha[i] > 0.0) {
                const double cut = std::min(alpha[i], s);
                alpha[i] -= cut;
                s -= cut;
            } else if (s < 0.0 && y[i] == -1 && alpha[i] > 0.0) {
                const double cut = std::min(alpha[i], -s);
                alpha[i] -= cut;
                s += cut;
            }
        }
    }
}

} // namespace

BinaryClassifier fit_svm_rbf(const Matrix& X, std::span<const int> y, const HyperParams& hp,
                             const BinaryClassifier* warm_from, const FitControls& controls,
                             FitInfo* info) {
    detail::check_binary_problem(X, y);
    hp.validate();
    detail::count_fit_call();

    const std::size_t n = X.rows;
    const double C = hp.c_reg;

    std::vector<double> alpha(n, 0.0);
    if (warm_from != nullptr) {
        if (const auto* prior = std::get_if<SvmRbfClassifier>(&warm_from->model());
            prior != nullptr && prior->support_vectors.cols == X.cols &&
            prior->support_vectors.rows > 0) {
            warm_start_alphas(X, y, C, *prior, alpha);
        }
    }

    KernelCache cache(X, hp.gamma, kCacheBytes);

    // f_t = sum_j alpha_j y_j K(x_j, x_t); the decision value minus the bias.
    std::vector<double> f(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] == 0.0) {
            continue;
        }
        const auto kj = cache.row(j);
        const double coeff = alpha[j] * static_cast<double>(y[j]);
        for (std::size_t t = 0; t < n; ++t) {
            f[t] += coeff * kj[t];
        }
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::int64_t iter = 0;
    double f_up = -inf;
    double f_low = inf;

    // Maximal violating pair SMO over F_t = f_t - y_t: the most violating
    // (i_up, i_low) pair is optimized jointly until the KKT gap closes.
    while (true) {
        std::size_t i_up = kNoIndex;
        std::size_t i_low = kNoIndex;
        f_up = inf;
        f_low = -inf;
        for (std::size_t t = 0; t < n; ++t) {
            const double Ft = f[t] - static_cast<double>(y[t]);
            const bool in_up = (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
            if (in_up && Ft < f_up) {
                f_up = Ft;
                i_up = t;
            }
            if (in_low && Ft > f_low) {
                f_low = Ft;
                i_low = t;
            }
        }
        if (!(f_low - f_up > controls.svm_kkt_tol)) {
            break;
        }
        if (iter >= controls.svm_max_iter) {
            throw ConvergenceError("svm solver still violates optimality by " +
                                   std::to_string(f_low - f_up) + " after " +
                                   std::to_string(iter) + " updates");
        }

        const std::size_t i = i_up;
        const std::size_t j = i_low;
        const double yi = static_cast<double>(y[i]);
        const double yj = static_cast<double>(y[j]);
        const double ai_old = alpha[i];
        const double aj_old = alpha[j];

        double lo, hi;
        if (y[i] != y[j]) {
            const double diff = aj_old - ai_old;
            lo = std::max(0.0, diff);
            hi = std::min(C, C + diff);
        } else {
            const double sum = ai_old + aj_old;
            lo = std::max(0.0, sum - C);
            hi = std::min(C, sum);
        }

        const auto ki = cache.row(i);
        const auto kj = cache.row(j); // does not evict ki: at least two slots
        const double eta = 2.0 - 2.0 * ki[j]; // K_ii = K_jj = 1 for the RBF kernel
        const double fi = f[i] - yi;
        const double fj = f[j] - yj;

        double aj;
        if (eta > 1e-12) {
            aj = std::clamp(aj_old + yj * (fi - fj) / eta, lo, hi);
        } else {
            // flat curvature: the objective is linear along the constraint
            // line, so step to whichever end descends
            aj = (yj * (fi - fj) > 0.0) ? hi : lo;
        }
        double ai = ai_old + yi * yj * (aj_old - aj);
        if (ai < 0.0) {
            aj = aj_old + yi * yj * ai_old;
            ai = 0.0;
        } else if (ai > C) {
            aj = aj_old + yi * yj * (ai_old - C);
            ai = C;
        }
        aj = std::clamp(aj, 0.0, C);

        // Snap cancellation dust onto the box bounds. A coefficient that is
        // off a bound by less than double rounding error keeps its point in
        // the working set while the feasible interval for any pair built with
        // it collapses to a single point, freezing the solver.
        const double snap = 1e-10 * C;
        if (ai < snap) {
            ai = 0.0;
        } else if (ai > C - snap) {
            ai = C;
        }
        if (aj < snap) {
            aj = 0.0;
        } else if (aj > C - snap) {
            aj = C;
        }

        if (ai == ai_old && aj == aj_old) {
            throw ConvergenceError("svm solver stalled with optimality gap " +
                                   std::to_string(f_low - f_up));
        }

        const double di = (ai - ai_old) * yi;
        const double dj = (aj - aj_old) * yj;
        for (std::size_t t = 0; t < n; ++t) {
            f[t] += di * ki[t] + dj * kj[t];
        }
        alpha[i] = ai;
        alpha[j] = aj;
        ++iter;
    }

    // Bias: average y_t - f_t over free support vectors; fall back to the
    // midpoint of the violating-pair bounds when every coefficient is at a bound.
    double bias = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C) {
            bias += static_cast<double>(y[t]) - f[t];
            ++free_count;
        }
    }
    if (free_count > 0) {
        bias /= static_cast<double>(free_count);
    } else if (f_up == inf) {
        bias = -f_low;
    } else if (f_low == -inf) {
        bias = -f_up;
    } else {
        bias = -(f_up + f_low) / 2.0;
    }

    SvmRbfClassifier model;
    model.gamma = hp.gamma;
    model.bias = bias;
    const double keep_threshold = 1e-12 * C;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > keep_threshold) {
            model.support_vectors.push_row(X.row(t));
            model.dual_coeffs.push_back(alpha[t] * static_cast<double>(y[t]));
        }
    }

    if (model.support_vectors.rows == 0) {
        // cannot happen for a solved dual with both classes present
        throw ConvergenceError("svm solver produced no support vectors");
    }

    if (info != nullptr) {
        info->iterations = iter;
        info->final_residual = std::max(0.0, f_low - f_up);
    }
    return BinaryClassifier{std::move(model)};
}

} // namespace ovkit
