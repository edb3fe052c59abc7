#pragma once

#include <cstdint>
#include <random>

#include "pdmf/funcrep.hpp"

namespace pdmf::instances {

using funcrep::ExprPtr;

/// Seeded mt19937_64 with an explicit 53-bit mapping to [0, 1), so coefficient
/// streams are reproducible from the documented draw order alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

 private:
  std::mt19937_64 gen_;
};

/// Exactly idempotent, real-symmetric projector-valued instance
/// P = T diag(I_rank, 0) T^-1 with T = I + epsilon*M, M a real-coefficient
/// matrix polynomial of degree <= degree. Coefficients are drawn uniformly
/// from [-1, 1] in graded-lex term order, row-major within each coefficient,
/// then rescaled so that epsilon times the coefficient-sum bound on ||M||_F
/// stays below 0.9 (which keeps T invertible on the whole polydisc).
ExprPtr gen_idempotent_instance(int n, int m, int rank, int degree, double epsilon,
                                std::uint64_t seed);

struct UnitaryInstance {
  ExprPtr u;       // star-unitary: u(z) * conj(u(conj z)) = I by construction
  ExprPtr v_true;  // the generating factor, u = v_true * star(v_true)^-1
};

/// Star-unitary instance built from V = I + epsilon*N with complex random
/// coefficients (re then im per entry, same draw order) bounded by 0.5.
UnitaryInstance gen_symmetric_unitary_instance(int n, int m, int degree, double epsilon,
                                               std::uint64_t seed);

}  // namespace pdmf::instances
