// Smoothing kernels and compactly supported bump profiles. Used both to
// weight the pairwise complexity penalty between codebook components and to
// build the smooth partition of unity over chart coordinates.

#pragma once

#include <stdexcept>
#include <string>

#include "geoquant/types.hpp"

namespace geoquant {

/// C-infinity profile of radius: identically 1 on [0, r_inner], identically
/// 0 on [r_outer, inf), strictly between 0 and 1 in the shell. Built from
/// the classical exp(-1/z) mollifier.
struct BumpProfile {
    double r_inner = 0.0;
    double r_outer = 1.0;

    BumpProfile(double inner, double outer) : r_inner(inner), r_outer(outer) {
        if (!(r_inner >= 0.0) || !(r_outer > r_inner)) {
            throw std::invalid_argument("BumpProfile: need 0 <= r_inner < r_outer");
        }
    }
};

/// Evaluate a bump profile at radius t >= 0.
double bump_eval(const BumpProfile& p, double t);

enum class KernelKind { InverseDistance, Gaussian, Bump };

/// Pairwise kernel specification.
///   InverseDistance: 1 / max(|x - x'|, d_min)
///   Gaussian(sigma): (2 pi sigma^2)^(-n/2) exp(-|x - x'|^2 / (2 sigma^2))
///   Bump(r1, r2):    bump profile of |x - x'| with plateau r1, support r2
struct KernelSpec {
    KernelKind kind = KernelKind::Gaussian;
    double sigma = 1.0;       // Gaussian
    double r1 = 1.0;          // Bump inner radius
    double r2 = 2.0;          // Bump outer radius
    double d_min = 1e-9;      // InverseDistance clamp

    static KernelSpec inverse_distance(double d_min = 1e-9);
    static KernelSpec gaussian(double sigma);
    static KernelSpec bump(double r1, double r2);

    void validate() const;
};

/// Symmetric nonnegative kernel value between two points of equal dimension.
double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& x2);

} // namespace geoquant
