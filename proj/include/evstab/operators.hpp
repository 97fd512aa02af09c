#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "evstab/phase_space.hpp"

namespace evstab {

struct NotInImage : std::domain_error {
    using std::domain_error::domain_error;
};

// (Tf)(theta, E, L) = -(1/T) d_theta f by spectral differentiation; parity flips.
PhaseFunction transport_apply(const PhaseFunction& f);
// Zero-mean antiderivative; throws NotInImage when some orbit mean exceeds tol * max|f|.
PhaseFunction transport_inverse(const PhaseFunction& f, double tol = 1e-10);
// Pointwise T applied to an evaluator (fourth-order differences in r and w).
Evaluator transport_evaluator(const SteadyState& ss, Evaluator f, double w_scale);

// Polynomial part of the generators g_i = |phi'| P_a(x) P_b(e) on the (E, L) support.
enum class GeneratorKind {
    box,          // e affine in E over [min E_min, E0]
    curvilinear,  // e = (E - E_min(L)) / (E0 - E_min(L))
};
std::string to_string(GeneratorKind k);
GeneratorKind generator_kind_from_string(const std::string& s);

class GeneratorSpace {
public:
    GeneratorSpace() = default;
    GeneratorSpace(const SteadyState& ss, std::size_t n_E, std::size_t n_L, GeneratorKind kind);
    std::size_t n_E() const { return nE_; }
    std::size_t n_L() const { return nL_; }
    std::size_t size() const { return nE_ * nL_; }
    GeneratorKind kind() const { return kind_; }
    // P_i(E, L), i = a * n_E + b.
    void values(double E, double L, double* out) const;
    double value(std::size_t i, double E, double L) const;

private:
    const SteadyState* ss_ = nullptr;
    std::size_t nE_ = 0, nL_ = 0;
    GeneratorKind kind_ = GeneratorKind::box;
    double Llo_ = 0, Lhi_ = 0, Elo_ = 0, E0_ = 0;
    MinimalEnergy emin_;
};

struct RadialOptions {
    std::size_t panels = 96;
    std::size_t order = 14;
};

// k = g + 4 pi |phi'| E e^{-lambda-mu}(r) int_r^Rmax e^{3 lambda + mu} p_g s ds.
PhaseFunction lift_to_kernelB(const PhaseGrid& grid, const std::function<double(double E, double L)>& g,
                              RadialOptions ro = {});
// |phi'| E e^{-lambda-mu}(r): the kernel element reached by the indicator profile at Rmax.
PhaseFunction profile_element(const PhaseGrid& grid);

// Normalized sup of (1/T) d_theta k + 4 pi R |phi'| e^{2 mu + lambda} W p_k(R).
double check_kernelB(const PhaseFunction& k, RadialOptions ro = {});

struct KernelBasisOptions {
    std::size_t n_E = 8, n_L = 8;
    GeneratorKind kind = GeneratorKind::curvilinear;
    bool include_profile = true;
    double drop_tol = 1e-12;  // relative to trace(G) / dim
    RadialOptions radial;
};

struct KernelBasis {
    KernelBasisOptions options;
    GeneratorSpace generators;
    std::vector<PhaseFunction> elements;  // lifted k_i (profile element last when included)
    Eigen::MatrixXd gram;
    std::vector<std::size_t> kept;        // pivot order of retained elements
    std::size_t dropped = 0;
    Eigen::MatrixXd chol;                 // lower factor on the kept subset
    double condition = 0;                 // of the kept Gram block
    std::vector<PhaseFunction> orthonormal;
    std::vector<double> residuals;        // check_kernelB per element
};

struct DegenerateBasis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PivotedCholesky {
    std::vector<std::size_t> kept;
    Eigen::MatrixXd L;  // kept x kept lower factor of G(kept, kept)
    std::size_t dropped = 0;
};
PivotedCholesky pivoted_cholesky(const Eigen::MatrixXd& G, double drop_tol);

KernelBasis build_kernel_basis(const PhaseGrid& grid, KernelBasisOptions opt = {}, bool compute_residuals = true);
// Coefficients c with G c = b, b_i = <k_i, f>; dropped elements get 0.
Eigen::VectorXd project_kerB(const KernelBasis& basis, const PhaseFunction& f);
// Pi f through the orthonormalized basis.
PhaseFunction apply_projection(const KernelBasis& basis, const PhaseFunction& f);

// Bf = Tf - 4 pi r |phi'| e^{2 mu + lambda} (w p_f - (w^2 / eps) j_f).
PhaseFunction apply_B(const PhaseFunction& f, RadialOptions ro = {});

struct LambdaIdentityResiduals {
    double B_identity = 0;      // lambda_{Bf} vs -4 pi r e^{lambda+mu} j_f
    double T_identity = 0;      // lambda_{e^{mu+lambda} Tf} vs -4 pi r e^{2mu+2lambda} j_f
};
// f must carry an evaluator.
LambdaIdentityResiduals lambda_identity_residuals(const PhaseFunction& f, RadialOptions ro = {});

// Moment-derivative identities for p_f and j_f; f must carry an evaluator.
struct MomentIdentityResiduals {
    double p_identity = 0;
    double j_identity = 0;
};
MomentIdentityResiduals moment_identity_residuals(const PhaseFunction& f, std::size_t n_r = 40);

// Sup over orbits of |int_0^1 (f + |phi'| e^{2 mu} lambda_f W^2 / E) dtheta|, normalized by sup |f|.
double kerB_perp_defect(const PhaseFunction& f, RadialOptions ro = {});

// |<Bf, h> + <f, Bh>| / (|Bf||h| + |f||Bh|).
double B_skew_defect(const PhaseFunction& f, const PhaseFunction& h, RadialOptions ro = {});

// Smooth compactly supported odd-in-w test function of index seed.
PhaseFunction odd_test_function(const PhaseGrid& grid, unsigned seed);

}  // namespace evstab
