#pragma once

#include "svk/chaos.hpp"

namespace svk {

// Forward products are graded: coefficient n uses input orders <= n only, so
// they are exact for every stored order.  Backward products sum input orders
// k >= n up to the common truncation order N; they are exact for truncated inputs.
// On train grids every output coefficient is recompressed.

// F_n[K ⋆ ξ] = sum_k F_{n-k}[K] ▷ F_k[ξ]
ChaosProcess star(const StarKernel& k, const ChaosProcess& x);
StarKernel star_kernel(const StarKernel& k1, const StarKernel& k2);
// bF_n[K ⋆ J] = sum_k F_{n-k}[K] ▷ bF_k[J]
AstKernel star_kj(const StarKernel& k, const AstKernel& j);

// F_n[J ∗ ξ] = sum_k bF_{n-k}[J] ∗ F_k[ξ]
ChaosProcess ast(const AstKernel& j, const ChaosProcess& x);
AstKernel ast_jj(const AstKernel& j1, const AstKernel& j2);
StarKernel ast_jk(const AstKernel& j, const StarKernel& k);

// F_n[K ⊛ ξ](t0, t) = sum_{k>=n} int_{Δ_{k-n}(t0,T)} F_{k-n}[K](s, t0) F_k[ξ](s, t0, t) ds
ChaosProcess bstar(const StarKernel& k, const ChaosProcess& x);
// F_n[J ⊛* ξ](t0, t) = sum_{k>=n} int_{Δ_{k-n+1}(t0,T)} bF_{k-n}[J](s, t0) F_k[ξ](s, t) ds
ChaosProcess bast(const AstKernel& j, const ChaosProcess& x);
AstKernel bast_jj(const AstKernel& j1, const AstKernel& j2);
StarKernel bast_jk(const AstKernel& j, const StarKernel& k);

}  // namespace svk
