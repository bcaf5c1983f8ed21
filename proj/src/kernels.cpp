#include "geoquant/kernels.hpp"

#include <cmath>

namespace geoquant {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// h(z) = exp(-1/z) for z > 0, else 0. Infinitely flat at 0.
double mollifier(double z) {
    return z > 0.0 ? std::exp(-1.0 / z) : 0.0;
}

} // namespace

double bump_eval(const BumpProfile& p, double t) {
    if (t < 0.0) throw std::invalid_argument("bump_eval: negative radius");
    if (t <= p.r_inner) return 1.0;
    if (t >= p.r_outer) return 0.0;
    const double theta = (t - p.r_inner) / (p.r_outer - p.r_inner);
    const double a = mollifier(theta);
    const double b = mollifier(1.0 - theta);
    return b / (a + b);
}

KernelSpec KernelSpec::inverse_distance(double d_min) {
    KernelSpec s;
    s.kind = KernelKind::InverseDistance;
    s.d_min = d_min;
    s.validate();
    return s;
}

KernelSpec KernelSpec::gaussian(double sigma) {
    KernelSpec s;
    s.kind = KernelKind::Gaussian;
    s.sigma = sigma;
    s.validate();
    return s;
}

KernelSpec KernelSpec::bump(double r1, double r2) {
    KernelSpec s;
    s.kind = KernelKind::Bump;
    s.r1 = r1;
    s.r2 = r2;
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    switch (kind) {
        case KernelKind::InverseDistance:
            if (!(d_min > 0.0)) throw std::invalid_argument("kernel: d_min must be > 0");
            break;
        case KernelKind::Gaussian:
            if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be > 0");
            break;
        case KernelKind::Bump:
            if (!(r1 > 0.0) || !(r2 > r1)) {
                throw std::invalid_argument("kernel: need 0 < r1 < r2");
            }
            break;
    }
}

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& x2) {
    if (x.size() != x2.size()) {
        throw std::invalid_argument("kernel_eval: dimension mismatch");
    }
    const double dist = (x - x2).norm();
    switch (spec.kind) {
        case KernelKind::InverseDistance:
            return 1.0 / std::max(dist, spec.d_min);
        case KernelKind::Gaussian: {
            const double n = static_cast<double>(x.size());
            const double var = spec.sigma * spec.sigma;
            return std::pow(kTwoPi * var, -0.5 * n)
                   * std::exp(-0.5 * dist * dist / var);
        }
        case KernelKind::Bump:
            return bump_eval(BumpProfile(spec.r1, spec.r2), dist);
    }
    throw std::logic_error("kernel_eval: unknown kernel kind");
}

} // namespace geoquant
