#include "kernels_impl.hpp"

namespace bismut {

void run_halfline_scalar(const HalflineParams& p, std::uint64_t first_path,
                         std::size_t count, HalflineRows& out,
                         std::size_t out_offset) {
  run_halfline_batch<LanesScalar>(p, first_path, count, out, out_offset);
}

}  // namespace bismut
