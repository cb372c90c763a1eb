#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gkpsim/errors.hpp"
#include "gkpsim/grid.hpp"

namespace gkpsim {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Truncated annihilation operator on levels 0..n_cut-1.
inline CMat annihilation(int n_cut) {
    if (n_cut < 2) throw ConfigError("n_cut must be at least 2");
    CMat a = CMat::Zero(n_cut, n_cut);
    for (int n = 1; n < n_cut; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline CMat number_op(int n_cut) {
    CMat n = CMat::Zero(n_cut, n_cut);
    for (int i = 0; i < n_cut; ++i) n(i, i) = i;
    return n;
}

inline CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CVec fock_basis_state(int n, int n_cut) {
    if (n < 0 || n >= n_cut) throw ConfigError("fock level outside cutoff");
    CVec v = CVec::Zero(n_cut);
    v(n) = 1.0;
    return v;
}

inline CVec coherent_state(std::complex<double> alpha, int n_cut) {
    CVec v(n_cut);
    const double mag = std::abs(alpha);
    const double arg = std::arg(alpha);
    const double log_mag = mag > 0.0 ? std::log(mag) : -1e300;
    for (int n = 0; n < n_cut; ++n) {
        const double lg = n * log_mag - 0.5 * std::lgamma(n + 1.0) - 0.5 * mag * mag;
        const double ph = n * arg;
        v(n) = std::exp(lg) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return v;
}

// A codeword pair with the error set to test against the two
// distinguishability conditions.
struct CodePair {
    CVec word0, word1;
    std::vector<CMat> errors;
};

struct QecReport {
    double dev_balance = 0.0;  // max |<0|Ei'Ej|0> - <1|Ei'Ej|1>|
    double dev_offdiag = 0.0;  // max |<0|Ei'Ej|1>|
    bool pass = false;
};

// Knill-Laflamme style check. Requires that no error leaks appreciable
// weight into the top two truncation levels of any codeword, otherwise the
// deviations would reflect the cutoff rather than the code.
inline QecReport qec_check(const CodePair& code, double tol) {
    if (code.errors.empty()) throw ConfigError("qec check needs at least one error");
    const int dim = static_cast<int>(code.word0.size());
    for (const auto& e : code.errors) {
        for (const CVec* w : {&code.word0, &code.word1}) {
            const CVec ew = e * (*w);
            const double top = std::norm(ew(dim - 1)) + std::norm(ew(dim - 2));
            if (top > tol / 10.0)
                throw NumericalError("cutoff-leakage: error operator reaches the truncation edge");
        }
    }
    QecReport rep;
    for (const auto& ei : code.errors) {
        for (const auto& ej : code.errors) {
            const CMat m = ei.adjoint() * ej;
            const std::complex<double> d00 = code.word0.dot(m * code.word0);
            const std::complex<double> d11 = code.word1.dot(m * code.word1);
            const std::complex<double> d01 = code.word0.dot(m * code.word1);
            rep.dev_balance = std::max(rep.dev_balance, std::abs(d00 - d11));
            rep.dev_offdiag = std::max(rep.dev_offdiag, std::abs(d01));
        }
    }
    rep.pass = rep.dev_balance < tol && rep.dev_offdiag < tol;
    return rep;
}

// Smallest binomial code: {(|0> + |4>)/sqrt(2), |2>}.
inline CodePair kitten_code(int n_cut = 20) {
    if (n_cut < 6) throw ConfigError("kitten code needs n_cut >= 6");
    CodePair c;
    c.word0 = (fock_basis_state(0, n_cut) + fock_basis_state(4, n_cut)) / std::sqrt(2.0);
    c.word1 = fock_basis_state(2, n_cut);
    return c;
}

// Two-mode extension: {(|0,4> + |4,0>)/sqrt(2), |2,2>}.
inline CodePair two_mode_kitten_code(int n_cut_per_mode = 20) {
    const int d = n_cut_per_mode;
    CodePair c;
    const auto f = [&](int a, int b) {
        CVec v = CVec::Zero(d * d);
        v(a * d + b) = 1.0;
        return v;
    };
    c.word0 = (f(0, 4) + f(4, 0)) / std::sqrt(2.0);
    c.word1 = f(2, 2);
    return c;
}

inline CMat exp_diag_number(double coeff, int n_cut) {
    CMat m = CMat::Zero(n_cut, n_cut);
    for (int n = 0; n < n_cut; ++n) m(n, n) = std::exp(coeff * n);
    return m;
}

// {I, sqrt(gamma) a}: the leading error set the kitten code is built for.
inline std::vector<CMat> loss_errors_identity(double gamma, int n_cut) {
    return {CMat::Identity(n_cut, n_cut), std::sqrt(gamma) * annihilation(n_cut)};
}

// {e^{-gamma n/2}, sqrt(gamma) a}: no-jump backaction included.
inline std::vector<CMat> loss_errors_kraus(double gamma, int n_cut) {
    return {exp_diag_number(-gamma / 2.0, n_cut), std::sqrt(gamma) * annihilation(n_cut)};
}

// Two-mode first-order loss set {sqrt(g) a, sqrt(g) b, e^{-g(na+nb)/2}}.
inline std::vector<CMat> two_mode_loss_errors(double gamma, int n_cut_per_mode) {
    const int d = n_cut_per_mode;
    const CMat a = annihilation(d);
    const CMat id = CMat::Identity(d, d);
    const CMat damp = exp_diag_number(-gamma / 2.0, d);
    return {std::sqrt(gamma) * kron(a, id), std::sqrt(gamma) * kron(id, a), kron(damp, damp)};
}

// Roots of tan x + tanh x = 0, one per interval ((k-1/2) pi, k pi). Uses the
// pole-free form sin x + tanh x cos x, whose endpoint signs alternate.
inline std::vector<double> cat_sweet_spots(int count) {
    if (count < 1) throw ConfigError("count must be positive");
    std::vector<double> roots;
    const auto f = [](double x) { return std::sin(x) + std::tanh(x) * std::cos(x); };
    for (int k = 1; k <= count; ++k) {
        double a = (k - 0.5) * kPi;
        double b = k * kPi;
        double fa = f(a);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = f(mid);
            if ((fa > 0.0) == (fm > 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
    return roots;
}

// Normalized four-component cat codewords at mean-photon parameter
// x = alpha^2: word0 from equal superposition of the four coherent phases,
// word1 with opposite sign on the imaginary pair.
inline CodePair four_cat_code(double x, int n_cut = 60) {
    if (!(x > 0.0)) throw ConfigError("alpha^2 must be positive");
    const double alpha = std::sqrt(x);
    const std::complex<double> ia(0.0, alpha);
    const CVec cp = coherent_state(alpha, n_cut);
    const CVec cm = coherent_state(-alpha, n_cut);
    const CVec cip = coherent_state(ia, n_cut);
    const CVec cim = coherent_state(-ia, n_cut);
    CodePair c;
    c.word0 = cp + cm + cip + cim;
    c.word1 = cp + cm - cip - cim;
    c.word0 /= c.word0.norm();
    c.word1 /= c.word1.norm();
    return c;
}

struct KerrCatReport {
    double top_value = 0.0;       // largest eigenvalue
    double pair_splitting = 0.0;  // top pair degeneracy breaking
    double gap_to_third = 0.0;
    double overlap_even = 0.0;  // weight of even cat inside the top pair
    double overlap_odd = 0.0;
    double stabilizer_residual = 0.0;  // max |(a^2 - alpha^2) v| over top pair
};

// Spectrum of -K n(n-1) + E(a^2 + a'^2) near its top band: the cat-qubit
// pair, its splitting, and the pseudo-gap to the rest of the band.
inline KerrCatReport kerr_cat_spectrum(double kerr, double drive, int n_cut) {
    if (!(kerr > 0.0)) throw ConfigError("kerr coefficient must be positive");
    if (drive < 0.0) throw ConfigError("drive must be nonnegative");
    CMat h = CMat::Zero(n_cut, n_cut);
    for (int n = 0; n < n_cut; ++n) h(n, n) = -kerr * static_cast<double>(n) * (n - 1);
    for (int i = 0; i + 2 < n_cut; ++i) {
        const double v = drive * std::sqrt((i + 1.0) * (i + 2.0));
        h(i, i + 2) += v;
        h(i + 2, i) += v;
    }
    Eigen::SelfAdjointEigenSolver<CMat> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    const auto& vals = solver.eigenvalues();   // ascending
    const auto& vecs = solver.eigenvectors();
    const int top = n_cut - 1;

    const int guard = static_cast<int>(0.9 * n_cut);
    for (int r = 0; r < 2; ++r) {
        double leak = 0.0;
        for (int n = guard; n < n_cut; ++n) leak += std::norm(vecs(n, top - r));
        if (leak > 1e-6)
            throw NumericalError("cutoff too small: top eigenvector weight above 0.9 n_cut");
    }

    KerrCatReport rep;
    rep.top_value = vals(top);
    rep.pair_splitting = std::abs(vals(top) - vals(top - 1));
    rep.gap_to_third = std::abs(vals(top - 1) - vals(top - 2));

    const double alpha = std::sqrt(drive / kerr);
    CVec even = coherent_state(alpha, n_cut) + coherent_state(-alpha, n_cut);
    CVec odd = coherent_state(alpha, n_cut) - coherent_state(-alpha, n_cut);
    even /= even.norm();
    const double odd_norm = odd.norm();
    if (odd_norm > 0.0) odd /= odd_norm;  // the odd cat degenerates at zero drive
    const CVec v1 = vecs.col(top);
    const CVec v2 = vecs.col(top - 1);
    rep.overlap_even = std::norm(v1.dot(even)) + std::norm(v2.dot(even));
    rep.overlap_odd = std::norm(v1.dot(odd)) + std::norm(v2.dot(odd));

    const CMat a = annihilation(n_cut);
    const CMat stab = a * a - alpha * alpha * CMat::Identity(n_cut, n_cut);
    rep.stabilizer_residual = std::max((stab * v1).norm(), (stab * v2).norm());
    return rep;
}

// Residual of the two-photon-dissipation fixed points: both cat states must
// be annihilated by a^2 - alpha^2 up to truncation error.
inline double dissipative_fixed_point_check(double alpha, int n_cut) {
    CVec even = coherent_state(alpha, n_cut) + coherent_state(-alpha, n_cut);
    CVec odd = coherent_state(alpha, n_cut) - coherent_state(-alpha, n_cut);
    const CMat a = annihilation(n_cut);
    const CMat stab = a * a - alpha * alpha * CMat::Identity(n_cut, n_cut);
    double residual = 0.0;
    for (CVec* v : {&even, &odd}) {
        const double n = v->norm();
        if (n == 0.0) continue;  // the odd cat degenerates at alpha = 0
        *v /= n;
        residual = std::max(residual, (stab * (*v)).norm());
    }
    return residual;
}

struct BlochMessiahReport {
    Eigen::Matrix2cd u_bs, v_bs;
    Eigen::Matrix2d d_a, d_b;
    double squeeze_xi = 0.0;
    double recon_dev_a = 0.0;
    double recon_dev_b = 0.0;
    double symplectic_dev = 0.0;
};

// Beamsplitter-squeezer-beamsplitter factorization of the ideal two-mode
// position coupler: mode transform a_out = A a + B a', with
// A = [[1, -1/2], [1/2, 1]] and B = [[0, 1/2], [1/2, 0]] decomposed as
// A = U D_A V', B = U D_B V^T over a common beamsplitter pair.
inline BlochMessiahReport bloch_messiah_cnot() {
    using Eigen::Matrix2cd;
    using Eigen::Matrix2d;
    const std::complex<double> im(0.0, 1.0);
    Matrix2cd a_mat, b_mat;
    a_mat << 1.0, -0.5, 0.5, 1.0;
    b_mat << 0.0, 0.5, 0.5, 0.0;

    const double theta = 0.5 * std::asin(2.0 / std::sqrt(5.0));
    const std::complex<double> ep = std::exp(im * theta);
    const std::complex<double> em = std::exp(-im * theta);
    Matrix2cd u;
    u << im * ep / std::sqrt(2.0), im * em / std::sqrt(2.0), -ep / std::sqrt(2.0),
        em / std::sqrt(2.0);
    Matrix2cd swap;
    swap << 0.0, 1.0, 1.0, 0.0;
    const Matrix2cd v = swap * u.conjugate();

    BlochMessiahReport rep;
    rep.u_bs = u;
    rep.v_bs = v;
    rep.d_a = (Matrix2d() << std::sqrt(5.0) / 2.0, 0.0, 0.0, std::sqrt(5.0) / 2.0).finished();
    rep.d_b = (Matrix2d() << 0.5, 0.0, 0.0, 0.5).finished();
    rep.squeeze_xi = -std::acosh(std::sqrt(5.0) / 2.0);

    const Matrix2cd a_rec = u * rep.d_a.cast<std::complex<double>>() * v.adjoint();
    const Matrix2cd b_rec = u * rep.d_b.cast<std::complex<double>>() * v.transpose();
    rep.recon_dev_a = (a_rec - a_mat).cwiseAbs().maxCoeff();
    rep.recon_dev_b = (b_rec - b_mat).cwiseAbs().maxCoeff();
    const Matrix2cd sympl =
        a_mat * a_mat.adjoint() - b_mat * b_mat.adjoint() - Matrix2cd::Identity();
    rep.symplectic_dev = sympl.cwiseAbs().maxCoeff();
    return rep;
}

// Expectation of the discrete rotation e^{i 2 pi n / (S+1)}.
inline std::complex<double> rotation_symmetry_check(const CVec& codeword, int s_fold) {
    if (s_fold < 1) throw ConfigError("S must be at least 1");
    std::complex<double> acc = 0.0;
    for (int n = 0; n < codeword.size(); ++n) {
        const double ph = 2.0 * kPi * n / (s_fold + 1.0);
        acc += std::norm(codeword(n)) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return acc;
}

}  // namespace gkpsim
