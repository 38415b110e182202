use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::fading::rician_sample;
use super::geometry::{los_component, Position, UpaGeometry};
use super::irs::IrsPhaseVector;

/// Physical layout and propagation constants for one deployment.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig<T> {
    pub positions: Vec<Position<T>>,
    pub irs_position: Position<T>,
    /// `None` removes the reflecting surface.
    pub irs: Option<UpaGeometry<T>>,
    pub kappa: T,
    pub noise_power: T,
    pub transmit_power: T,
    pub path_loss_exponent: T,
}

/// Dense `K × K` table indexed by ordered user pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTable<V> {
    users: usize,
    cells: Vec<V>,
}

impl<V: Clone> PairTable<V> {
    pub fn filled(users: usize, v: V) -> Self {
        Self {
            users,
            cells: vec![v; users * users],
        }
    }
}

impl<V> PairTable<V> {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, r: usize, k: usize) -> &V {
        &self.cells[r * self.users + k]
    }

    pub fn set(&mut self, r: usize, k: usize, v: V) {
        self.cells[r * self.users + k] = v;
    }
}

/// All channel coefficients for one coherence interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    users: usize,
    /// IRS-side vector `g_k` per user; empty without a surface.
    irs_links: Vec<Vec<Complex<T>>>,
    direct: PairTable<Complex<T>>,
    azimuth: Vec<T>,
    elevation: Vec<T>,
    distance: Vec<T>,
    pub kappa: T,
    pub noise_power: T,
    pub transmit_power: T,
}

/// `g_k · diag(e^{jφ}) · g_r^H + h_direct` for row vectors `g_r`, `g_k`.
pub fn composite_channel<T: Real>(
    g_r: &[Complex<T>],
    g_k: &[Complex<T>],
    phases: &IrsPhaseVector<T>,
    h_direct: Complex<T>,
) -> Result<Complex<T>> {
    if g_r.len() != g_k.len() || g_k.len() != phases.len() {
        return Err(Error::Shape {
            op: "composite_channel",
            lhs: vec![g_r.len(), g_k.len()],
            rhs: vec![phases.len()],
        });
    }
    let cascade = g_k
        .iter()
        .zip(g_r)
        .zip(phases.reflection())
        .fold(Complex::new(T::zero(), T::zero()), |acc, ((&gk, &gr), e)| {
            acc + gk * e * gr.conj()
        });
    Ok(cascade + h_direct)
}

impl<T: Real> ChannelRealization<T> {
    /// Draws distance-dependent direct links, then IRS-side Rician vectors,
    /// so a seed fixes the direct links whatever the surface size.
    ///
    /// Direct links are `sqrt(d^{−α})·e^{jψ}` with uniform `ψ`, drawn once per
    /// unordered pair so the table is reciprocal. Elevation is 0 in the plane.
    pub fn generate<R: Rng + ?Sized>(cfg: &ChannelConfig<T>, rng: &mut R) -> Result<Self> {
        let users = cfg.positions.len();
        if users < 2 {
            return Err(Error::invalid("need at least two users"));
        }
        if !(cfg.noise_power >= T::zero()) || !(cfg.transmit_power > T::zero()) {
            return Err(Error::invalid("noise power must be ≥ 0 and transmit power > 0"));
        }
        let mut direct = PairTable::filled(users, Complex::new(T::zero(), T::zero()));
        for r in 0..users {
            for k in r + 1..users {
                let d = cfg.positions[r].distance(&cfg.positions[k]);
                if !(d > T::zero()) {
                    return Err(Error::invalid(format!("users {r} and {k} are co-located")));
                }
                let amp = d.powf(-cfg.path_loss_exponent).sqrt();
                let psi = T::lit(rng.random_range(0.0..std::f64::consts::TAU));
                let h = Complex::from_polar(amp, psi);
                direct.set(r, k, h);
                direct.set(k, r, h);
            }
        }
        let mut azimuth = Vec::with_capacity(users);
        let mut distance = Vec::with_capacity(users);
        let mut irs_links = Vec::with_capacity(users);
        for p in &cfg.positions {
            let d = p.distance(&cfg.irs_position);
            let az = p.azimuth_from(&cfg.irs_position);
            azimuth.push(az);
            distance.push(d);
            match &cfg.irs {
                Some(geom) => {
                    let los = los_component(d, az, T::zero(), geom)?;
                    irs_links.push(rician_sample(&los, cfg.kappa, rng)?);
                }
                None => irs_links.push(Vec::new()),
            }
        }
        Ok(Self {
            users,
            irs_links,
            direct,
            elevation: vec![T::zero(); users],
            azimuth,
            distance,
            kappa: cfg.kappa,
            noise_power: cfg.noise_power,
            transmit_power: cfg.transmit_power,
        })
    }

    /// Surface-free realization whose every direct link equals `h`.
    pub fn uniform(users: usize, h: Complex<T>, noise_power: T) -> Self {
        let mut direct = PairTable::filled(users, h);
        for u in 0..users {
            direct.set(u, u, Complex::new(T::zero(), T::zero()));
        }
        Self {
            users,
            irs_links: vec![Vec::new(); users],
            direct,
            azimuth: vec![T::zero(); users],
            elevation: vec![T::zero(); users],
            distance: vec![T::one(); users],
            kappa: T::zero(),
            noise_power,
            transmit_power: T::one(),
        }
    }

    /// Builds a realization from explicit IRS vectors and a direct table.
    pub fn from_parts(
        irs_links: Vec<Vec<Complex<T>>>,
        direct: PairTable<Complex<T>>,
        noise_power: T,
        transmit_power: T,
    ) -> Result<Self> {
        let users = irs_links.len();
        if direct.users() != users {
            return Err(Error::invalid("direct table and IRS links disagree on user count"));
        }
        let n = irs_links.first().map_or(0, Vec::len);
        if irs_links.iter().any(|g| g.len() != n) {
            return Err(Error::invalid("IRS vectors must share one length"));
        }
        Ok(Self {
            users,
            irs_links,
            direct,
            azimuth: vec![T::zero(); users],
            elevation: vec![T::zero(); users],
            distance: vec![T::one(); users],
            kappa: T::zero(),
            noise_power,
            transmit_power,
        })
    }

    /// Same realization with the reflecting surface removed.
    pub fn without_irs(&self) -> Self {
        let mut c = self.clone();
        c.irs_links = vec![Vec::new(); self.users];
        c
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Number of IRS elements (0 without a surface).
    pub fn irs_elements(&self) -> usize {
        self.irs_links.first().map_or(0, Vec::len)
    }

    pub fn irs_link(&self, k: usize) -> &[Complex<T>] {
        &self.irs_links[k]
    }

    pub fn direct(&self, r: usize, k: usize) -> Complex<T> {
        *self.direct.get(r, k)
    }

    pub fn azimuth(&self, k: usize) -> T {
        self.azimuth[k]
    }

    pub fn elevation(&self, k: usize) -> T {
        self.elevation[k]
    }

    pub fn distance(&self, k: usize) -> T {
        self.distance[k]
    }

    /// Products `g_k[n]·conj(g_r[n])`, the per-element cascade weights of link `(r, k)`.
    pub fn cascade_weights(&self, r: usize, k: usize) -> Vec<Complex<T>> {
        self.irs_links[k]
            .iter()
            .zip(&self.irs_links[r])
            .map(|(&gk, &gr)| gk * gr.conj())
            .collect()
    }

    pub fn composite(&self, r: usize, k: usize, phases: &IrsPhaseVector<T>) -> Result<Complex<T>> {
        if r == k {
            return Err(Error::invalid(format!("no self-link for user {r}")));
        }
        composite_channel(&self.irs_links[r], &self.irs_links[k], phases, self.direct(r, k))
    }

    /// Composite coefficient for every ordered pair (zero on the diagonal).
    pub fn composite_table(&self, phases: &IrsPhaseVector<T>) -> Result<PairTable<Complex<T>>> {
        let mut t = PairTable::filled(self.users, Complex::new(T::zero(), T::zero()));
        for r in 0..self.users {
            for k in 0..self.users {
                if r != k {
                    t.set(r, k, self.composite(r, k, phases)?);
                }
            }
        }
        Ok(t)
    }
}
