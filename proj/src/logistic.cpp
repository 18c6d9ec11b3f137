#include "ovkit/classifiers.hpp"

#include "classifiers_detail.hpp"

#include <algorithm>
#include <cmath>

namespace ovkit {

namespace {

// log(1 + exp(t)) without overflow for large |t|.
double log1pexp(double t) {
    if (t > 0.0) {
        return t + std::log1p(std::exp(-t));
    }
    return std::log1p(std::exp(t));
}

// 1 / (1 + exp(-t)) evaluated from the side that cannot overflow.
double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

// In-place Cholesky solve of A x = rhs for symmetric positive definite A
// (row-major n x n). Returns false when a pivot is not positive.
bool cholesky_solve(std::vector<double>& A, std::size_t n, std::vector<double>& rhs) {
    for (std::size_t k = 0; k < n; ++k) {
        double pivot = A[k * n + k];
        for (std::size_t p = 0; p < k; ++p) {
            pivot -= A[k * n + p] * A[k * n + p];
        }
        if (!(pivot > 0.0)) {
            return false;
        }
        const double lkk = std::sqrt(pivot);
        A[k * n + k] = lkk;
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = A[i * n + k];
            for (std::size_t p = 0; p < k; ++p) {
                v -= A[i * n + p] * A[k * n + p];
            }
            A[i * n + k] = v / lkk;
        }
    }
    // forward substitution L z = rhs
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t p = 0; p < i; ++p) {
            v -= A[i * n + p] * rhs[p];
        }
        rhs[i] = v / A[i * n + i];
    }
    // back substitution L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t p = ii + 1; p < n; ++p) {
            v -= A[p * n + ii] * rhs[p];
        }
        rhs[ii] = v / A[ii * n + ii];
    }
    return true;
}

} // namespace

double logistic_objective(const Matrix& X, std::span<const int> y, double c_reg,
                          std::span<const double> weights, double bias,
                          std::vector<double>* grad_w, double* grad_b) {
    if (weights.size() != X.cols) {
        throw DimensionMismatch("weight vector does not match feature dimension");
    }
    if (y.size() != X.rows) {
        throw LengthMismatch("label vector does not match example count");
    }

    double value = 0.0;
    for (double w : weights) {
        value += 0.5 * w * w;
    }
    if (grad_w != nullptr) {
        grad_w->assign(weights.begin(), weights.end());
    }
    if (grad_b != nullptr) {
        *grad_b = 0.0;
    }

    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto xi = X.row(i);
        double z = bias;
        for (std::size_t j = 0; j < X.cols; ++j) {
            z += weights[j] * xi[j];
        }
        const double t = -static_cast<double>(y[i]) * z;
        value += c_reg * log1pexp(t);
        if (grad_w != nullptr || grad_b != nullptr) {
            const double coeff = c_reg * -static_cast<double>(y[i]) * sigmoid(t);
            if (grad_w != nullptr) {
                for (std::size_t j = 0; j < X.cols; ++j) {
                    (*grad_w)[j] += coeff * xi[j];
                }
            }
            if (grad_b != nullptr) {
                *grad_b += coeff;
            }
        }
    }
    return value;
}

BinaryClassifier fit_logistic(const Matrix& X, std::span<const int> y, const HyperParams& hp,
                              const BinaryClassifier* warm_from, const FitControls& controls,
                              FitInfo* info) {
    detail::check_binary_problem(X, y);
    hp.validate();
    detail::count_fit_call();

    const std::size_t d = X.cols;
    const std::size_t m = d + 1; // weights then bias
    const double C = hp.c_reg;

    std::vector<double> w(d, 0.0);
    double b = 0.0;
    if (warm_from != nullptr) {
        if (const auto* prior = std::get_if<LogisticClassifier>(&warm_from->model());
            prior != nullptr && prior->weights.size() == d) {
            w = prior->weights;
            b = prior->bias;
        }
    }

    std::vector<double> grad_w(d, 0.0);
    double grad_b = 0.0;
    double value = logistic_objective(X, y, C, w, b, &grad_w, &grad_b);

    std::vector<double> g(m, 0.0);
    auto gather_gradient = [&] {
        std::copy(grad_w.begin(), grad_w.end(), g.begin());
        g[d] = grad_b;
    };
    gather_gradient();

    std::int64_t iter = 0;
    std::vector<double> H(m * m, 0.0);
    std::vector<double> step_dir(m, 0.0);
    std::vector<double> w_try(d, 0.0);

    while (norm2(g) > controls.logistic_grad_tol) {
        if (iter >= controls.logistic_max_iter) {
            throw ConvergenceError("logistic solver did not reach gradient norm " +
                                   std::to_string(controls.logistic_grad_tol) + " in " +
                                   std::to_string(controls.logistic_max_iter) + " iterations");
        }

        // Hessian: identity on the weight block plus C * sum_i r_i x~_i x~_i^T
        // over augmented rows x~ = (x, 1), with r_i = sigma(z_i) * (1 - sigma(z_i)).
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            H[j * m + j] = 1.0;
        }
        H[d * m + d] = 1e-10; // keeps the unpenalized bias row positive definite
        for (std::size_t i = 0; i < X.rows; ++i) {
            const auto xi = X.row(i);
            double z = b;
            for (std::size_t j = 0; j < d; ++j) {
                z += w[j] * xi[j];
            }
            const double s = sigmoid(z);
            const double r = C * s * (1.0 - s);
            if (r == 0.0) {
                continue;
            }
            for (std::size_t a = 0; a <= d; ++a) {
                const double xa = (a < d) ? xi[a] : 1.0;
                const double ra = r * xa;
                for (std::size_t c = a; c <= d; ++c) {
                    const double xc = (c < d) ? xi[c] : 1.0;
                    H[a * m + c] += ra * xc;
                }
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t c = 0; c < a; ++c) {
                H[a * m + c] = H[c * m + a];
            }
        }

        // Newton direction; boost the diagonal if the factorization stalls.
        bool solved = false;
        double jitter = 0.0;
        for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
            std::vector<double> A = H;
            if (jitter > 0.0) {
                for (std::size_t a = 0; a < m; ++a) {
                    A[a * m + a] += jitter;
                }
            }
            for (std::size_t a = 0; a < m; ++a) {
                step_dir[a] = -g[a];
            }
            solved = cholesky_solve(A, m, step_dir);
            jitter = (jitter == 0.0) ? 1e-8 : jitter * 100.0;
        }
        double slope = 0.0;
        if (solved) {
            for (std::size_t a = 0; a < m; ++a) {
                slope += g[a] * step_dir[a];
            }
        }
        if (!solved || slope >= 0.0) {
            // fall back to steepest descent
            slope = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                step_dir[a] = -g[a];
                slope -= g[a] * g[a];
            }
        }

        // Armijo backtracking line search.
        constexpr double kArmijo = 1e-4;
        double step = 1.0;
        double b_try = b;
        double new_value = value;
        while (true) {
            for (std::size_t j = 0; j < d; ++j) {
                w_try[j] = w[j] + step * step_dir[j];
            }
            b_try = b + step * step_dir[d];
            new_value = logistic_objective(X, y, C, w_try, b_try, nullptr, nullptr);
            if (new_value <= value + kArmijo * step * slope || step < 1e-12) {
                break;
            }
            step *= 0.5;
        }

        w = w_try;
        b = b_try;
        value = logistic_objective(X, y, C, w, b, &grad_w, &grad_b);
        gather_gradient();
        ++iter;
    }

    if (info != nullptr) {
        info->iterations = iter;
        info->final_residual = norm2(g);
    }
    return BinaryClassifier{LogisticClassifier{std::move(w), b}};
}

} // namespace ovkit
