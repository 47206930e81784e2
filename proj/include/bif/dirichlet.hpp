#pragma once

#include <vector>

#include "bif/dataset.hpp"
#include "bif/rng.hpp"

namespace bif {

// --- special functions -------------------------------------------------

double lgamma_pos(double x);   // x > 0
double digamma(double x);      // x > 0
double trigamma(double x);     // x > 0

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
// d P(a, x) / d x = x^{a-1} e^{-x} / Gamma(a)
double gamma_p_dx(double a, double x);

// --- Dirichlet ---------------------------------------------------------

struct DirichletParams {
    std::vector<double> alpha;

    explicit DirichletParams(std::vector<double> a);
    std::size_t dim() const { return alpha.size(); }
    double sum() const;

    // Clamps entries below the floor; used when mapping optimizer output.
    static DirichletParams floored(std::vector<double> a, double floor = 1e-6);
};

struct SimplexVector {
    std::vector<double> f;

    std::size_t dim() const { return f.size(); }
};

SimplexVector dirichlet_mean(const DirichletParams& p);

// Per-coordinate standard deviation of the Dirichlet marginals.
std::vector<double> dirichlet_stddev(const DirichletParams& p);

double gamma_draw(double shape, Rng& rng);  // unit scale, Marsaglia-Tsang

SimplexVector dirichlet_sample(const DirichletParams& p, Rng& rng);

// Sample together with the pathwise jacobian df/dalpha. The per-coordinate
// shape gradient dz/dalpha comes from the implicit inverse-CDF relation
// dz/da = -(dP/da)/(dP/dz); dP/da by central difference.
struct SampleWithGrad {
    SimplexVector f;
    std::vector<double> jac;  // D x D, jac[i*D+j] = df_i/dalpha_j

    double at(std::size_t i, std::size_t j) const { return jac[i * f.dim() + j]; }
};
SampleWithGrad dirichlet_sample_with_grad(const DirichletParams& p, Rng& rng);

// A(alpha) = sum_d lgamma(alpha_d) - lgamma(sum_d alpha_d)
double log_partition(const DirichletParams& p);

// E[log f_d] = psi(alpha_d) - psi(sum alpha)
std::vector<double> expected_sufficient_stat(const DirichletParams& p);

double kl_divergence(const DirichletParams& p, const DirichletParams& q);

// dKL(Dir(alpha)||Dir(beta))/dalpha
std::vector<double> kl_divergence_grad(const DirichletParams& p,
                                       const DirichletParams& q);

double log_pdf(const DirichletParams& p, const SimplexVector& f);

}  // namespace bif
