//! A complete link description evaluated by the analytical model.

use crate::analytic::{per_eye_results, LinkResult, FOLD_TAIL_TOLERANCE};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::spectra::{FiberSpec, FrequencyGrid, Response, TransferFunction};
use crate::units::{db_to_lin, ModulationSpec, NoiseSpec, PhotodiodeSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Link<S> {
    pub modulation: ModulationSpec<S>,
    pub photodiode: PhotodiodeSpec<S>,
    pub noise: NoiseSpec<S>,
    /// Electro-optical bandwidth limitation of the transmitter and receiver.
    pub bandwidth: Response<S>,
    pub fiber: Option<FiberSpec<S>>,
    /// Flat optical power loss (dB), e.g. the splitter of a PON.
    pub loss_db: S,
    /// Receiver filter applied to signal and noise alike.
    pub rx_filter: Option<Response<S>>,
}

impl<S: Scalar> Link<S> {
    pub fn new(modulation: ModulationSpec<S>, photodiode: PhotodiodeSpec<S>, noise: NoiseSpec<S>, bandwidth: Response<S>) -> Self {
        Self { modulation, photodiode, noise, bandwidth, fiber: None, loss_db: S::zero(), rx_filter: None }
    }

    pub fn with_fiber(mut self, fiber: FiberSpec<S>) -> Self {
        self.fiber = Some(fiber);
        self
    }

    pub fn with_loss_db(mut self, loss_db: S) -> Self {
        self.loss_db = loss_db;
        self
    }

    pub fn with_rx_filter(mut self, rx: Response<S>) -> Self {
        self.rx_filter = Some(rx);
        self
    }

    pub fn loss_linear(&self) -> S {
        db_to_lin(-self.loss_db)
    }

    /// Intensity-to-intensity response H_ch: bandwidth, small-signal dispersion and loss.
    pub fn channel_response(&self) -> Response<S> {
        let mut parts = vec![self.bandwidth.clone()];
        if let Some(f) = self.fiber {
            parts.push(Response::CdSmallSignal(f));
        }
        if self.loss_db != S::zero() {
            parts.push(Response::Flat(self.loss_linear()));
        }
        if parts.len() == 1 {
            parts.pop().unwrap_or(Response::Flat(S::one()))
        } else {
            Response::Cascade(parts)
        }
    }

    pub fn pulse_response(&self) -> Response<S> {
        Response::Sinc { period: self.modulation.symbol_period() }
    }

    /// Average received optical power.
    pub fn received_power(&self) -> S {
        self.modulation.avg_power() * self.channel_response().eval(S::zero()).norm()
    }

    pub fn default_grid(&self) -> Result<FrequencyGrid<S>> {
        FrequencyGrid::for_symbol_rate(self.modulation.symbol_rate())
    }

    pub fn evaluate(&self, grid: &FrequencyGrid<S>) -> Result<LinkResult<S>> {
        let h_t = TransferFunction::sample(grid, &self.pulse_response());
        let h_ch = TransferFunction::sample(grid, &self.channel_response());
        let h_rx = self.rx_filter.as_ref().map(|r| TransferFunction::sample(grid, r));
        per_eye_results(&self.modulation, &self.photodiode, &self.noise, &h_t, &h_ch, h_rx.as_ref())
    }

    /// Evaluates on the default grid, widening it (up to 8x) while the SNR
    /// mass beyond the folding range exceeds the fold tolerance.
    pub fn evaluate_default(&self) -> Result<LinkResult<S>> {
        let mut grid = self.default_grid()?;
        let mut r = self.evaluate(&grid)?;
        for _ in 0..3 {
            if r.tail_fraction <= S::of(FOLD_TAIL_TOLERANCE) {
                break;
            }
            grid = grid.widened();
            r = self.evaluate(&grid)?;
        }
        Ok(r)
    }

    pub fn with_avg_power(&self, avg_power: S) -> Result<Self> {
        Ok(Self { modulation: self.modulation.with_avg_power(avg_power)?, ..self.clone() })
    }
}
