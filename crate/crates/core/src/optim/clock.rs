use std::time::Duration;

#[cfg(not(target_arch = "wasm32"))]
pub(crate) struct Timer(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Timer {
    pub(crate) fn start() -> Self {
        Timer(std::time::Instant::now())
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

/// `std::time::Instant` panics on `wasm32-unknown-unknown`.
#[cfg(target_arch = "wasm32")]
pub(crate) struct Timer;

#[cfg(target_arch = "wasm32")]
impl Timer {
    pub(crate) fn start() -> Self {
        Timer
    }

    pub(crate) fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}
