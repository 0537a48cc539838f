// Compress a random symmetric tensor, change its basis with the blocked
// algorithm, and compare against the dense chain of mode products.

#include <iostream>

#include "symtensor.hpp"

int main() {
  using namespace symtensor;

  const std::size_t m = 3, n = 12, p = 8, b_a = 4, b_c = 2;
  const RandomProblem pr = random_problem(7, m, n, p);

  const DenseTensor a = pr.dense_a();
  const BcssTensor a_bcss = compress(a, b_a);
  std::cout << "A: " << a.size() << " dense entries, " << a_bcss.payload_size()
            << " stored in " << a_bcss.num_blocks() << " canonical blocks\n";

  OpCounter blocked_ops, dense_ops;
  const BcssTensor c = sttsm_bcss(a_bcss, pr.x, b_c, {&blocked_ops});
  const DenseTensor c_dense = sttsm_dense_ttm(a, pr.x, {&dense_ops});

  std::cout << "max relative error: " << max_relative_error(decompress(c), c_dense) << '\n'
            << "flops  blocked=" << blocked_ops.flops << " dense=" << dense_ops.flops
            << " (model " << bcss_costs(m, n, p, b_a, b_c).flops << " / "
            << dense_costs(m, n, p).flops << ")\n";

  const MultiIndex j{1, 0, 3};
  const CanonicalRef ref = c.canonical_ref(j);
  std::cout << "block " << to_string(j) << " is stored as " << to_string(ref.canonical)
            << '\n';
}
