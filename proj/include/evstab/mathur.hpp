#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "evstab/operators.hpp"

namespace evstab {

double alpha0(const SteadyState& ss, double r);
double beta0(const SteadyState& ss, double r);

// f_r = |phi'| E e^{-lambda-mu}(R) 1_{R <= r} on the phase grid.
PhaseFunction indicator_profile(const PhaseGrid& grid, double r);

struct KernelOptions {
    std::size_t n_nodes = 160;      // Nystrom Gauss-Legendre nodes on [Rmin, Rmax]
    std::size_t n_E = 8, n_L = 8;   // generator degrees
    GeneratorKind kind = GeneratorKind::curvilinear;
    bool include_profile = true;
    std::size_t slice_order = 16;   // velocity quadrature per radius
    std::size_t panel_order = 6;    // radial quadrature between consecutive nodes
    std::size_t grading = 10;       // geometric refinements toward Rmin and Rmax
    double drop_tol = 1e-12;
};

// I(r_i, r_j) assembled through radial reductions of the H inner products.
struct IMatrix {
    std::vector<double> r;
    Eigen::MatrixXd I;
    Eigen::VectorXd direct;          // <f_r, f_r>_H at the nodes
    std::size_t basis_dim = 0, kept = 0, dropped = 0;
    double gram_condition = 0;
    double cauchy_schwarz_excess = 0;  // max of |I_ij| - sqrt(I_ii I_jj), clipped at 0
};
IMatrix I_matrix(const SteadyState& ss, const KernelOptions& opt, const std::vector<double>& r_nodes);

struct MathurKernel {
    std::vector<double> r, w;       // nodes and weights
    Eigen::MatrixXd K;
    Eigen::VectorXd eigenvalues;    // descending
    double hs_norm = 0;
    double eigen_hs_norm = 0;       // sqrt(sum lambda_j^2)
    double symmetry_defect = 0;     // max|K - K^T| / max|K|
    double boundary_max = 0;        // max |K| on the rows of the first and last node
    double max_abs = 0;
    std::size_t basis_dim = 0, kept = 0, dropped = 0;
    double gram_condition = 0;
};

std::vector<double> kernel_prefactor(const SteadyState& ss, const std::vector<double>& r);
MathurKernel kernel_K(const SteadyState& ss, const KernelOptions& opt = {});
// Kernel from nodal values: computes the HS norm and the Nystrom spectrum.
MathurKernel finalize_kernel(std::vector<double> r, std::vector<double> w, Eigen::MatrixXd K);
double hs_norm(const MathurKernel& k);
Eigen::VectorXd eigensolve(const MathurKernel& k);

// K(r, s) = sum_j lambda_j u_j(r) u_j(s) with L2-orthonormal Legendre u_j on [a, b].
MathurKernel synthetic_separable_kernel(const std::vector<double>& lambdas, double a = 0, double b = 1,
                                        std::size_t n_nodes = 64);

enum class Verdict { linearly_stable, zero_frequency_mode, unstable, inconclusive };
std::string to_string(Verdict v);

struct ConvergenceRow {
    std::string knob;  // "base", "radial_nodes", "basis_degree", "phase_quadrature"
    std::size_t n_nodes = 0, n_E = 0, n_L = 0, slice_order = 0;
    double lambda_1 = 0, hs_norm = 0;
    double rel_change_lambda_1 = 0, rel_change_hs = 0;
    double seconds = 0;
};

struct StabilityReport {
    Verdict verdict = Verdict::inconclusive;
    double lambda_1 = 0;  // operator norm of M
    double hs_norm = 0;
    std::size_t n_modes_above_one = 0;
    bool mode_bound_holds = true;  // n_modes_above_one < hs_norm^2
    double tol = 1e-3;
    std::vector<double> leading_eigenvalues;
    std::vector<ConvergenceRow> convergence;
    bool converged = true;
    double max_rel_change = 0;
    // Base-kernel diagnostics.
    double lambda_min = 0, eigen_hs_norm = 0, symmetry_defect = 0, boundary_max = 0, max_abs = 0;
    std::size_t n_nodes = 0, basis_dim = 0, kept = 0, dropped = 0;
    double gram_condition = 0;
};

// Three-way classification of a kernel spectrum.
StabilityReport classify(const MathurKernel& k, double tol = 1e-3);

struct StabilityOptions {
    KernelOptions kernel;
    double tol = 1e-3;
    bool refine = true;  // doubles each knob once
};
// The base kernel is copied to base_kernel when given.
StabilityReport stability_report(const SteadyState& ss, const StabilityOptions& opt = {},
                                 MathurKernel* base_kernel = nullptr);

}  // namespace evstab
