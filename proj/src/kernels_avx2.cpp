#include "kernels_impl.hpp"

namespace bismut {

void run_halfline_avx2(const HalflineParams& p, std::uint64_t first_path,
                       std::size_t count, HalflineRows& out,
                       std::size_t out_offset) {
#ifdef __AVX2__
  run_halfline_batch<LanesAvx2>(p, first_path, count, out, out_offset);
#else
  run_halfline_batch<LanesScalar>(p, first_path, count, out, out_offset);
#endif
}

}  // namespace bismut
