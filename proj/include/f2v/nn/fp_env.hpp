#pragma once

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace f2v::nn {

// Flush denormals to zero while in scope. Saturated sigmoid outputs push
// gradients into the denormal range, which is several times slower on x86.
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);  // FTZ | DAZ
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

}  // namespace f2v::nn
