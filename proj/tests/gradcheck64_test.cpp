// Built with PT_REAL_DOUBLE against the 64-bit numerical core.
#include <gtest/gtest.h>

#include "support/gradcheck_cases.hpp"

namespace pt {
namespace {

static_assert(sizeof(Real) == 8);

TEST(OpGradCheck64, AllOpsMatchCentralDifferences) {
  Rng rng(1234);
  for (auto& c : testing::op_grad_cases(rng)) {
    const auto report = testing::grad_check(c.inputs, c.build, rng, testing::default_fd_step());
    EXPECT_LT(report.max_relative_error, 1e-6) << c.name;
  }
}

}  // namespace
}  // namespace pt
