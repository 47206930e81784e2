#include "bif/dirichlet.hpp"

#include <cmath>
#include <limits>

namespace bif {

double lgamma_pos(double x) {
    if (!(x > 0.0)) throw DomainError("lgamma: argument must be positive");
    return std::lgamma(x);
}

double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
    double acc = 0.0;
    while (x < 8.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // asymptotic series in 1/x^2
    const double r = 1.0 / (x * x);
    double s = std::log(x) - 0.5 / x;
    s -= r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 -
              r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * 691.0 / 32760.0)))));
    return acc + s;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
    double acc = 0.0;
    while (x < 8.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double r = 1.0 / (x * x);
    double s = 1.0 / x + 0.5 * r;
    s += (1.0 / x) * r * (1.0 / 6.0 - r * (1.0 / 30.0 - r * (1.0 / 42.0 -
               r * (1.0 / 30.0 - r * 5.0 / 66.0))));
    return acc + s;
}

namespace {

// Series expansion of P(a,x), good for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lgamma_pos(a));
}

// Continued fraction for Q(a,x) (modified Lentz), good for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - lgamma_pos(a));
}

}  // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_p_dx(double a, double x) {
    if (x <= 0.0) return 0.0;
    return std::exp((a - 1.0) * std::log(x) - x - lgamma_pos(a));
}

DirichletParams::DirichletParams(std::vector<double> a) : alpha(std::move(a)) {
    if (alpha.empty()) throw DomainError("DirichletParams: empty parameter vector");
    for (double v : alpha)
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError("DirichletParams: entries must be positive and finite");
}

double DirichletParams::sum() const {
    double s = 0.0;
    for (double v : alpha) s += v;
    return s;
}

DirichletParams DirichletParams::floored(std::vector<double> a, double floor) {
    for (double& v : a)
        if (!(v > floor)) v = floor;
    return DirichletParams(std::move(a));
}

SimplexVector dirichlet_mean(const DirichletParams& p) {
    const double s = p.sum();
    SimplexVector m;
    m.f.resize(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) m.f[i] = p.alpha[i] / s;
    return m;
}

std::vector<double> dirichlet_stddev(const DirichletParams& p) {
    const double s = p.sum();
    std::vector<double> sd(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        const double a = p.alpha[i];
        sd[i] = std::sqrt(a * (s - a) / (s * s * (s + 1.0)));
    }
    return sd;
}

double gamma_draw(double shape, Rng& rng) {
    if (shape < 1.0) {
        // boost: z(a) = z(a+1) * u^{1/a}
        const double u = rng.uniform();
        return gamma_draw(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

SimplexVector dirichlet_sample(const DirichletParams& p, Rng& rng) {
    SimplexVector s;
    s.f.resize(p.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        double z = gamma_draw(p.alpha[i], rng);
        if (z < 1e-300) z = 1e-300;
        s.f[i] = z;
        sum += z;
    }
    for (double& v : s.f) v /= sum;
    return s;
}

SampleWithGrad dirichlet_sample_with_grad(const DirichletParams& p, Rng& rng) {
    const std::size_t D = p.dim();
    std::vector<double> z(D);
    std::vector<double> dzda(D);
    double S = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
        double zi = gamma_draw(p.alpha[i], rng);
        if (zi < 1e-300) zi = 1e-300;
        z[i] = zi;
        S += zi;
        const double a = p.alpha[i];
        const double h = std::max(1e-5, 1e-5 * a);
        const double num = (gamma_p(a + h, zi) - gamma_p(std::max(a - h, 1e-12), zi)) /
                           (a + h - std::max(a - h, 1e-12));
        const double den = gamma_p_dx(a, zi);
        dzda[i] = den > 0.0 ? -num / den : 0.0;
    }
    SampleWithGrad out;
    out.f.f.resize(D);
    out.jac.assign(D * D, 0.0);
    for (std::size_t i = 0; i < D; ++i) out.f.f[i] = z[i] / S;
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j) {
            const double dfi_dzj = ((i == j ? S : 0.0) - z[i]) / (S * S);
            out.jac[i * D + j] = dfi_dzj * dzda[j];
        }
    return out;
}

double log_partition(const DirichletParams& p) {
    double s = 0.0;
    for (double a : p.alpha) s += lgamma_pos(a);
    return s - lgamma_pos(p.sum());
}

std::vector<double> expected_sufficient_stat(const DirichletParams& p) {
    const double ds = digamma(p.sum());
    std::vector<double> t(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) t[i] = digamma(p.alpha[i]) - ds;
    return t;
}

double kl_divergence(const DirichletParams& p, const DirichletParams& q) {
    if (p.dim() != q.dim()) throw ShapeError("kl_divergence: dimension mismatch");
    const auto t = expected_sufficient_stat(p);
    double kl = log_partition(q) - log_partition(p);
    for (std::size_t i = 0; i < p.dim(); ++i)
        kl += (p.alpha[i] - q.alpha[i]) * t[i];
    return kl;
}

std::vector<double> kl_divergence_grad(const DirichletParams& p,
                                       const DirichletParams& q) {
    if (p.dim() != q.dim()) throw ShapeError("kl_divergence_grad: dimension mismatch");
    const double s = p.sum();
    double diff_sum = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) diff_sum += p.alpha[i] - q.alpha[i];
    const double tg_s = trigamma(s);
    std::vector<double> g(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i)
        g[i] = (p.alpha[i] - q.alpha[i]) * trigamma(p.alpha[i]) - tg_s * diff_sum;
    return g;
}

double log_pdf(const DirichletParams& p, const SimplexVector& f) {
    if (p.dim() != f.dim()) throw ShapeError("log_pdf: dimension mismatch");
    double lp = -log_partition(p);
    for (std::size_t i = 0; i < p.dim(); ++i) {
        const double x = f.f[i];
        if (x <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += (p.alpha[i] - 1.0) * std::log(x);
    }
    return lp;
}

}  // namespace bif
