#include "svk/products.hpp"

#include "svk/parallel.hpp"

namespace svk {

namespace {

using Term = DetKernel (*)(const DetKernel&, const DetKernel&);

void check_pair(const Grid& a, const Grid& b, int na, int nb, int ca, int rb, const char* what) {
  if (a != b) throw DomainError(std::string(what) + ": grid mismatch");
  if (na != nb) throw DomainError(std::string(what) + ": truncation orders differ");
  if (ca != rb) throw DomainError(std::string(what) + ": inner dimension mismatch");
}

DetKernel finish(DetKernel acc) { return acc.kind() == DetKernel::Kind::train ? compress(acc) : acc; }

DetKernel accumulate(const DetKernel& zero, const std::vector<DetKernel>& terms) {
  DetKernel acc = zero;
  for (const DetKernel& t : terms)
    if (!t.is_zero()) acc = add(acc, t);
  return finish(acc);
}

// coefficient n: sum over k = 0..n of term(left[n-k], right[k])
std::vector<DetKernel> graded(const std::vector<DetKernel>& left, const std::vector<DetKernel>& right, Term term,
                              int out_offset, int rows, int cols) {
  const int N = static_cast<int>(left.size()) - 1;
  const Grid& g = left[0].grid();
  std::vector<DetKernel> out(N + 1);
  parallel_for(0, N + 1, [&](long n) {
    std::vector<DetKernel> terms;
    for (int k = 0; k <= n; ++k)
      if (!left[n - k].is_zero() && !right[k].is_zero()) terms.push_back(term(left[n - k], right[k]));
    out[n] = accumulate(DetKernel::zero(g, static_cast<int>(n) + out_offset, rows, cols), terms);
  });
  return out;
}

// coefficient n: sum over k = n..N of term(left[k-n], right[k])
std::vector<DetKernel> backward(const std::vector<DetKernel>& left, const std::vector<DetKernel>& right, Term term,
                                int out_offset, int rows, int cols) {
  const int N = static_cast<int>(left.size()) - 1;
  const Grid& g = left[0].grid();
  std::vector<DetKernel> out(N + 1);
  parallel_for(0, N + 1, [&](long n) {
    std::vector<DetKernel> terms;
    for (int k = static_cast<int>(n); k <= N; ++k)
      if (!left[k - n].is_zero() && !right[k].is_zero()) terms.push_back(term(left[k - n], right[k]));
    out[n] = accumulate(DetKernel::zero(g, static_cast<int>(n) + out_offset, rows, cols), terms);
  });
  return out;
}

}  // namespace

ChaosProcess star(const StarKernel& k, const ChaosProcess& x) {
  check_pair(k.grid(), x.grid(), k.order(), x.order(), k.d(), x.rows(), "star");
  return ChaosProcess(graded(k.coeffs(), x.coeffs(), tri_product, 1, k.d(), x.cols()));
}

StarKernel star_kernel(const StarKernel& k1, const StarKernel& k2) {
  check_pair(k1.grid(), k2.grid(), k1.order(), k2.order(), k1.d(), k2.d(), "star_kernel");
  return StarKernel(graded(k1.coeffs(), k2.coeffs(), tri_product, 1, k1.d(), k2.d()));
}

AstKernel star_kj(const StarKernel& k, const AstKernel& j) {
  check_pair(k.grid(), j.grid(), k.order(), j.order(), k.d(), j.d(), "star_kj");
  return AstKernel(graded(k.coeffs(), j.coeffs(), tri_product, 2, k.d(), j.d()));
}

ChaosProcess ast(const AstKernel& j, const ChaosProcess& x) {
  check_pair(j.grid(), x.grid(), j.order(), x.order(), j.d(), x.rows(), "ast");
  return ChaosProcess(graded(j.coeffs(), x.coeffs(), ast_contract, 1, j.d(), x.cols()));
}

AstKernel ast_jj(const AstKernel& j1, const AstKernel& j2) {
  check_pair(j1.grid(), j2.grid(), j1.order(), j2.order(), j1.d(), j2.d(), "ast_jj");
  return AstKernel(graded(j1.coeffs(), j2.coeffs(), ast_contract, 2, j1.d(), j2.d()));
}

StarKernel ast_jk(const AstKernel& j, const StarKernel& k) {
  check_pair(j.grid(), k.grid(), j.order(), k.order(), j.d(), k.d(), "ast_jk");
  return StarKernel(graded(j.coeffs(), k.coeffs(), ast_contract, 1, j.d(), k.d()));
}

ChaosProcess bstar(const StarKernel& k, const ChaosProcess& x) {
  check_pair(k.grid(), x.grid(), k.order(), x.order(), k.d(), x.rows(), "bstar");
  return ChaosProcess(backward(k.coeffs(), x.coeffs(), bstar_term, 1, k.d(), x.cols()));
}

ChaosProcess bast(const AstKernel& j, const ChaosProcess& x) {
  check_pair(j.grid(), x.grid(), j.order(), x.order(), j.d(), x.rows(), "bast");
  return ChaosProcess(backward(j.coeffs(), x.coeffs(), bast_term, 1, j.d(), x.cols()));
}

AstKernel bast_jj(const AstKernel& j1, const AstKernel& j2) {
  check_pair(j1.grid(), j2.grid(), j1.order(), j2.order(), j1.d(), j2.d(), "bast_jj");
  return AstKernel(backward(j1.coeffs(), j2.coeffs(), bast_term, 2, j1.d(), j2.d()));
}

StarKernel bast_jk(const AstKernel& j, const StarKernel& k) {
  check_pair(j.grid(), k.grid(), j.order(), k.order(), j.d(), k.d(), "bast_jk");
  return StarKernel(backward(j.coeffs(), k.coeffs(), bast_term, 1, j.d(), k.d()));
}

}  // namespace svk
