#pragma once

namespace cvx::par {

// Sample reductions are accumulated in fixed blocks of kBlock samples:
// within a block left to right, then block partials left to right. The block
// layout does not depend on the thread count, so parallel and serial runs of
// the same kernel are bit-identical.
inline constexpr int kBlock = 64;

inline int num_blocks(int n) { return (n + kBlock - 1) / kBlock; }
inline int block_lo(int b) { return b * kBlock; }
inline int block_hi(int b, int n) {
    const int hi = (b + 1) * kBlock;
    return hi < n ? hi : n;
}

}  // namespace cvx::par
