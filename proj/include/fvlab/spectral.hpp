#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvlab/birth_death.hpp"
#include "fvlab/chain.hpp"
#include "fvlab/distribution.hpp"
#include "fvlab/linalg.hpp"

namespace fvlab {

enum class SpectralMethod { dense, tridiagonal };

// Eigenvalues of the NEGATED generator, sorted ascending, so an ergodic chain
// reports {0, gap, ...}. `gap` is absent when no eigenvalue exceeds the zero
// threshold (e.g. a single-state chain).
struct SpectralReport {
    std::vector<double> eigenvalues;
    std::optional<double> gap;
    SpectralMethod method = SpectralMethod::dense;
    double max_imag = 0.0;  // largest |Im| discarded on the general path
};

namespace detail {

// Implicit-QL iteration with shifts on a symmetric tridiagonal matrix.
// d holds the diagonal, e the n-1 couplings between d[i] and d[i+1];
// d is overwritten with the eigenvalues (unsorted).
inline void ql_implicit(std::vector<double>& d, std::vector<double> e) {
    const int n = static_cast<int>(d.size());
    if (n <= 1) return;
    e.push_back(0.0);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("ql_implicit: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Householder reduction of a symmetric matrix to tridiagonal form
// (eigenvalues only; transformations are not accumulated). Destroys a.
inline void householder_tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(a.rows());
    d.assign(n, 0.0);
    std::vector<double> sub(n, 0.0);
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (int k = 0; k <= l; ++k) scale += std::abs(a(i, k));
            if (scale == 0.0) {
                sub[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                sub[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    sub[j] = g / h;
                    f += sub[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    sub[j] = g = sub[j] - hh * f;
                    for (int k = 0; k <= j; ++k) a(j, k) -= f * sub[k] + g * a(i, k);
                }
            }
        } else {
            sub[i] = a(i, l);
        }
    }
    for (int i = 0; i < n; ++i) d[i] = a(i, i);
    e.assign(n > 1 ? n - 1 : 0, 0.0);
    for (int i = 1; i < n; ++i) e[i - 1] = sub[i];
}

// Diagonal similarity scaling to even out row/column norms before QR.
inline void balance(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    const double radix = 2.0;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c != 0.0 && r != 0.0) {
                double g = r / radix, f = 1.0;
                const double s = c + r;
                while (c < g) {
                    f *= radix;
                    c *= radix * radix;
                }
                g = r * radix;
                while (c > g) {
                    f /= radix;
                    c /= radix * radix;
                }
                if ((c + r) / f < 0.95 * s) {
                    done = false;
                    g = 1.0 / f;
                    for (int j = 0; j < n; ++j) a(i, j) *= g;
                    for (int j = 0; j < n; ++j) a(j, i) *= f;
                }
            }
        }
    }
}

// Reduction to upper Hessenberg form by stabilized elimination.
inline void hessenberg(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    for (int m = 1; m < n - 1; ++m) {
        double x = 0.0;
        int piv = m;
        for (int j = m; j < n; ++j) {
            if (std::abs(a(j, m - 1)) > std::abs(x)) {
                x = a(j, m - 1);
                piv = j;
            }
        }
        if (piv != m) {
            for (int j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
            for (int j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
        }
        if (x != 0.0) {
            for (int i = m + 1; i < n; ++i) {
                double y = a(i, m - 1);
                if (y != 0.0) {
                    y /= x;
                    a(i, m - 1) = y;
                    for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
                    for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
                }
            }
        }
    }
    for (int i = 2; i < n; ++i)
        for (int j = 0; j < i - 1; ++j) a(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
inline std::vector<std::complex<double>> hqr_eigenvalues(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<double> wr(n, 0.0), wi(n, 0.0);
    const double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
    if (anorm == 0.0) anorm = 1.0;
    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn--] = 0.0;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + std::copysign(z, p);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn] = z;
                        wi[nn - 1] = -z;
                    }
                    nn -= 2;
                } else {
                    if (its == 30) throw std::runtime_error("hqr: too many iterations");
                    if (its == 10 || its == 20) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    double p = 0.0, q = 0.0, r = 0.0;
                    int m;
                    for (m = nn - 2; m >= l; --m) {
                        const double z = a(m, m);
                        const double rr = x - z;
                        const double ss = y - z;
                        p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - rr - ss;
                        r = a(m + 2, m + 1);
                        const double s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                                        std::abs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            const double z = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                double pp = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    pp += r * a(k + 2, j);
                                    a(k + 2, j) -= pp * z;
                                }
                                a(k + 1, j) -= pp * y;
                                a(k, j) -= pp * x;
                            }
                            const int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                double pp = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    pp += z * a(i, k + 2);
                                    a(i, k + 2) -= pp * r;
                                }
                                a(i, k + 1) -= pp * q;
                                a(i, k) -= pp;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    std::vector<std::complex<double>> out(n);
    for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
    return out;
}

inline SpectralReport finish_report(std::vector<double> negated, SpectralMethod method,
                                    double max_imag, double zero_tol) {
    std::sort(negated.begin(), negated.end());
    SpectralReport rep;
    rep.method = method;
    rep.max_imag = max_imag;
    for (double v : negated)
        if (v > zero_tol && !rep.gap) rep.gap = v;
    rep.eigenvalues = std::move(negated);
    return rep;
}

}  // namespace detail

inline std::vector<double> symmetric_eigenvalues(Matrix a) {
    std::vector<double> d, e;
    detail::householder_tridiagonalize(a, d, e);
    detail::ql_implicit(d, e);
    std::sort(d.begin(), d.end());
    return d;
}

inline std::vector<std::complex<double>> general_eigenvalues(Matrix a) {
    if (a.rows() == 0) return {};
    if (a.rows() == 1) return {std::complex<double>(a(0, 0), 0.0)};
    detail::balance(a);
    detail::hessenberg(a);
    return detail::hqr_eigenvalues(a);
}

// Spectrum of -L for a generator L. Reversible generators (detected through
// their stationary law) are symmetrized by the sqrt(pi) similarity so the
// eigenvalues are certified real; anything else goes through the general QR
// path, which insists the imaginary parts are negligible.
inline SpectralReport dense_spectrum(const Matrix& l, std::size_t cap = 4000) {
    const std::size_t n = l.rows();
    if (l.cols() != n) throw std::invalid_argument("dense_spectrum: square matrix required");
    if (n > cap) throw std::runtime_error("dense_spectrum: size exceeds cap");
    if (n == 0) return SpectralReport{};
    const double scale = std::max(1.0, inf_norm(l));
    const double zero_tol = 1e-8 * scale;

    if (n == 1) {
        return detail::finish_report({-l(0, 0)}, SpectralMethod::dense, 0.0, zero_tol);
    }

    bool reversible = false;
    std::vector<double> pi;
    try {
        pi = stationary_distribution(l).weights;
        reversible = true;
        for (std::size_t x = 0; x < n && reversible; ++x) {
            if (!(pi[x] > 0.0)) reversible = false;
            for (std::size_t y = x + 1; y < n; ++y) {
                if (std::abs(pi[x] * l(x, y) - pi[y] * l(y, x)) > 1e-10 * scale) {
                    reversible = false;
                    break;
                }
            }
        }
    } catch (const std::runtime_error&) {
        reversible = false;
    }

    if (reversible) {
        Matrix s(n, n);
        std::vector<double> root(n);
        for (std::size_t x = 0; x < n; ++x) root[x] = std::sqrt(pi[x]);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y) s(x, y) = root[x] * l(x, y) / root[y];
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = x + 1; y < n; ++y) {
                const double avg = 0.5 * (s(x, y) + s(y, x));
                s(x, y) = s(y, x) = avg;
            }
        std::vector<double> ev = symmetric_eigenvalues(std::move(s));
        for (double& v : ev) v = -v;
        return detail::finish_report(std::move(ev), SpectralMethod::dense, 0.0, zero_tol);
    }

    auto complex_ev = general_eigenvalues(l);
    double max_imag = 0.0;
    std::vector<double> ev;
    ev.reserve(n);
    for (const auto& z : complex_ev) {
        max_imag = std::max(max_imag, std::abs(z.imag()));
        ev.push_back(-z.real());
    }
    if (max_imag > 1e-8 * scale)
        throw std::runtime_error("dense_spectrum: complex eigenvalues, |Im| up to " +
                                 std::to_string(max_imag));
    return detail::finish_report(std::move(ev), SpectralMethod::dense, max_imag, zero_tol);
}

// Fast path for reversible birth-death generators: similarity transform to a
// symmetric tridiagonal matrix with off-diagonal -sqrt(b_n d_{n+1}).
inline SpectralReport tridiagonal_spectrum(const BirthDeathSpec& s, const FiniteDistribution& pi,
                                           std::size_t cap = 5000) {
    validate_birth_death(s);
    const std::size_t n = s.top();
    if (n + 1 > cap) throw std::runtime_error("tridiagonal_spectrum: size exceeds cap");
    if (pi.size() != n + 1) throw std::invalid_argument("tridiagonal_spectrum: pi length mismatch");
    double scale = 1.0;
    for (std::size_t k = 0; k <= n; ++k) scale = std::max(scale, s.birth[k] + s.death[k]);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(pi.weights[k] * s.birth[k] - pi.weights[k + 1] * s.death[k + 1]) >
            1e-10 * scale)
            throw std::runtime_error("tridiagonal_spectrum: detailed balance violated");
    }
    std::vector<double> d(n + 1), e(n);
    for (std::size_t k = 0; k <= n; ++k) d[k] = s.birth[k] + s.death[k];
    for (std::size_t k = 0; k < n; ++k) e[k] = -std::sqrt(s.birth[k] * s.death[k + 1]);
    detail::ql_implicit(d, e);
    return detail::finish_report(std::move(d), SpectralMethod::tridiagonal, 0.0, 1e-8 * scale);
}

// Eigenvector of a symmetric tridiagonal matrix for an isolated eigenvalue,
// by inverse iteration with a slightly shifted dense LU solve.
inline std::vector<double> tridiagonal_eigenvector(const std::vector<double>& diag,
                                                   const std::vector<double>& off, double lambda) {
    const std::size_t n = diag.size();
    double scale = 1.0;
    for (double v : diag) scale = std::max(scale, std::abs(v));
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = diag[i] - lambda - 1e-11 * scale;
        if (i + 1 < n) {
            a(i, i + 1) = off[i];
            a(i + 1, i) = off[i];
        }
    }
    auto perm = lu_factor(a, 1e-300);
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (int pass = 0; pass < 3; ++pass) {
        x = lu_solve(a, perm, x);
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : x) v /= norm;
    }
    return x;
}

}  // namespace fvlab
