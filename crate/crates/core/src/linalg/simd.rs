//! Clears dirty upper AVX register state left by faer kernels, which
//! otherwise slows later SSE scalar code such as the RK4 loops.

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn zero_upper() {
    std::arch::x86_64::_mm256_zeroupper();
}

/// Passes `value` through after clearing the upper vector-register state.
#[inline]
pub(crate) fn settle<T>(value: T) -> T {
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("avx") {
        // SAFETY: the CPU supports AVX, checked above.
        unsafe { zero_upper() }
    }
    value
}
