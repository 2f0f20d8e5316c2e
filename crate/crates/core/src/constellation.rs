//! Symbol alphabets, power allocation and superposition coding.
//!
//! Labels are integers read from bit strings most-significant bit first, so
//! `"01"` is label 1. Every constellation stores its points indexed by label
//! and is normalised to unit average energy.
//!
//! QPSK and square QAM use per-axis Gray PAM: the low half of the label bits
//! drives the in-phase axis, the high half the quadrature axis, and a zero
//! axis code maps to the largest positive amplitude. For QPSK this gives
//! `00 -> (1+j)/√2`, `01 -> (-1+j)/√2`, `10 -> (1-j)/√2`, `11 -> (-1-j)/√2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};
use crate::C64;

/// Modulation family and order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    /// Gray-labelled M-PSK, M a power of two and at least 8.
    Psk(u32),
    /// Square Gray QAM, M an even power of two and at least 16.
    Qam(u32),
}

impl Modulation {
    pub fn order(self) -> usize {
        match self {
            Modulation::Bpsk => 2,
            Modulation::Qpsk => 4,
            Modulation::Psk(m) | Modulation::Qam(m) => m as usize,
        }
    }

    pub fn bits_per_symbol(self) -> u32 {
        self.order().trailing_zeros()
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Bpsk => write!(f, "bpsk"),
            Modulation::Qpsk => write!(f, "qpsk"),
            Modulation::Psk(m) => write!(f, "{m}psk"),
            Modulation::Qam(m) => write!(f, "{m}qam"),
        }
    }
}

impl FromStr for Modulation {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "bpsk" | "2psk" => return Ok(Modulation::Bpsk),
            "qpsk" | "4psk" | "4qam" => return Ok(Modulation::Qpsk),
            _ => {}
        }
        let parse_order = |digits: &str| -> Result<u32> {
            digits
                .parse::<u32>()
                .map_err(|_| crate::Error::Input(format!("unknown modulation '{s}'")))
        };
        if let Some(d) = t.strip_suffix("psk") {
            let m = parse_order(d)?;
            if m < 8 || !m.is_power_of_two() || m > 1 << 16 {
                return input(format!("PSK order must be a power of two >= 8, got '{s}'"));
            }
            return Ok(Modulation::Psk(m));
        }
        if let Some(d) = t.strip_suffix("qam") {
            let m = parse_order(d)?;
            if m < 16 || !m.is_power_of_two() || m.trailing_zeros() % 2 != 0 || m > 1 << 16 {
                return input(format!(
                    "QAM order must be an even power of two >= 16, got '{s}'"
                ));
            }
            return Ok(Modulation::Qam(m));
        }
        input(format!("unknown modulation '{s}'"))
    }
}

impl TryFrom<String> for Modulation {
    type Error = crate::Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Modulation> for String {
    fn from(m: Modulation) -> String {
        m.to_string()
    }
}

fn gray(p: usize) -> usize {
    p ^ (p >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut p = 0;
    while g != 0 {
        p ^= g;
        g >>= 1;
    }
    p
}

/// Parses a `0`/`1` string, most-significant bit first.
pub fn parse_bits(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > 32 {
        return input(format!("bit string must hold 1..=32 bits, got {:?}", bits));
    }
    let mut v = 0usize;
    for c in bits.chars() {
        v = (v << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                _ => return input(format!("bit string {:?} contains '{c}'", bits)),
            };
    }
    Ok(v)
}

/// Formats `value` as a `width`-bit string, most-significant bit first.
pub fn format_bits(value: usize, width: u32) -> String {
    (0..width)
        .rev()
        .map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// A unit-energy constellation with points stored by label.
#[derive(Debug, Clone, PartialEq)]
pub struct UserConstellation {
    modulation: Modulation,
    symbols: Vec<C64>,
}

impl UserConstellation {
    pub fn new(modulation: Modulation) -> Self {
        let m = modulation.order();
        let symbols = match modulation {
            Modulation::Bpsk => vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            Modulation::Qpsk => square_qam(4),
            Modulation::Qam(_) => square_qam(m),
            Modulation::Psk(_) => {
                let mut s = vec![C64::new(0.0, 0.0); m];
                for p in 0..m {
                    s[gray(p)] = C64::from_polar(1.0, 2.0 * PI * p as f64 / m as f64);
                }
                s
            }
        };
        Self { modulation, symbols }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn order(&self) -> usize {
        self.symbols.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.modulation.bits_per_symbol()
    }

    pub fn symbols(&self) -> &[C64] {
        &self.symbols
    }

    pub fn symbol(&self, label: usize) -> C64 {
        self.symbols[label]
    }

    pub fn label_bits(&self, label: usize) -> String {
        format_bits(label, self.bits_per_symbol())
    }

    /// Maps a bit string to its constellation point.
    pub fn gray_map(&self, bits: &str) -> Result<C64> {
        if bits.len() != self.bits_per_symbol() as usize {
            return input(format!(
                "{} expects {} bits, got {:?}",
                self.modulation,
                self.bits_per_symbol(),
                bits
            ));
        }
        Ok(self.symbols[parse_bits(bits)?])
    }

    /// Nearest-point label; ties go to the lowest label.
    pub fn demap(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, s) in self.symbols.iter().enumerate() {
            let d = (z - s).norm_sqr();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    pub fn mean_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.order() as f64
    }
}

fn square_qam(m: usize) -> Vec<C64> {
    let k = m.trailing_zeros() / 2;
    let levels = 1usize << k;
    let mask = levels - 1;
    let scale = (2.0 * (m as f64 - 1.0) / 3.0).sqrt().recip();
    let amp = |code: usize| (levels as f64 - 1.0 - 2.0 * gray_inverse(code) as f64) * scale;
    (0..m)
        .map(|label| C64::new(amp(label & mask), amp(label >> k)))
        .collect()
}

/// Power allocation coefficients for the power-domain layers, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PowerAllocation {
    coefficients: Vec<f64>,
}

impl PowerAllocation {
    /// Coefficients must be positive, sum to one and be strictly decreasing.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return config("power allocation needs at least one coefficient");
        }
        if let Some(a) = coefficients.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return config(format!("power coefficients must be positive, got {a}"));
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return config(format!(
                "power coefficients must sum to 1, got {sum} from {coefficients:?}"
            ));
        }
        if coefficients.windows(2).any(|w| w[1] >= w[0]) {
            return config(format!(
                "power coefficients must be strictly decreasing, got {coefficients:?}"
            ));
        }
        Ok(Self { coefficients })
    }

    /// Default allocation for `layers` power-domain users (2 to 5).
    pub fn default_for(layers: usize) -> Result<Self> {
        let c: &[f64] = match layers {
            1 => &[1.0],
            2 => &[0.8, 0.2],
            3 => &[0.7, 0.2, 0.1],
            4 => &[0.6, 0.25, 0.1, 0.05],
            5 => &[0.4, 0.25, 0.2, 0.1, 0.05],
            n => return config(format!("no default power allocation for {n} layers")),
        };
        Self::new(c.to_vec())
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficient(&self, layer: usize) -> f64 {
        self.coefficients[layer]
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.coefficients.iter().map(|a| a.sqrt()).collect()
    }

    /// Sum of the coefficients of layers strictly weaker than `layer`.
    pub fn residual_after(&self, layer: usize) -> f64 {
        self.coefficients[layer + 1..].iter().sum()
    }
}

impl TryFrom<Vec<f64>> for PowerAllocation {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PowerAllocation> for Vec<f64> {
    fn from(p: PowerAllocation) -> Vec<f64> {
        p.coefficients
    }
}

/// Superposes one symbol per layer: `Σ √a_l s_l`.
pub fn superpose(symbols: &[C64], pa: &PowerAllocation) -> Result<C64> {
    if symbols.len() != pa.len() {
        return input(format!(
            "superpose needs {} symbols, got {}",
            pa.len(),
            symbols.len()
        ));
    }
    Ok(symbols
        .iter()
        .zip(pa.coefficients())
        .map(|(s, a)| s * a.sqrt())
        .sum())
}

/// Every superposed symbol, in lexicographic order of the per-layer labels
/// with the strongest layer most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScAlphabet {
    orders: Vec<usize>,
    values: Vec<C64>,
}

impl ScAlphabet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> C64 {
        self.values[index]
    }

    pub fn layer_orders(&self) -> &[usize] {
        &self.orders
    }

    /// Index of the superposed symbol carrying the given per-layer labels.
    pub fn index_of(&self, labels: &[usize]) -> usize {
        labels
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (k, m)| acc * m + k)
    }

    /// Per-layer labels of the entry at `index`.
    pub fn labels_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.orders.len()];
        for (slot, m) in out.iter_mut().zip(&self.orders).rev() {
            *slot = index % m;
            index /= m;
        }
        out
    }

    pub fn mean_energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.len() as f64
    }
}

pub fn enumerate_sc_alphabet(
    constellations: &[UserConstellation],
    pa: &PowerAllocation,
) -> Result<ScAlphabet> {
    if constellations.len() != pa.len() {
        return config(format!(
            "{} constellations for {} power coefficients",
            constellations.len(),
            pa.len()
        ));
    }
    let orders: Vec<usize> = constellations.iter().map(|c| c.order()).collect();
    let total = orders.iter().try_fold(1usize, |acc, m| acc.checked_mul(*m));
    let total = match total {
        Some(t) if t <= 1 << 20 => t,
        _ => return config("superposed alphabet exceeds 2^20 entries"),
    };
    let amps = pa.amplitudes();
    let mut alphabet = ScAlphabet {
        orders,
        values: Vec::with_capacity(total),
    };
    for idx in 0..total {
        let labels = alphabet.labels_of(idx);
        let v = labels
            .iter()
            .zip(constellations)
            .zip(&amps)
            .map(|((k, c), a)| c.symbol(*k) * a)
            .sum();
        alphabet.values.push(v);
    }
    Ok(alphabet)
}

/// Zero-based antenna index selected by a natural-binary bit string.
pub fn map_antenna(bits: &str, n_antennas: usize) -> Result<usize> {
    if !n_antennas.is_power_of_two() || n_antennas < 2 {
        return input(format!(
            "antenna count must be a power of two >= 2, got {n_antennas}"
        ));
    }
    let width = n_antennas.trailing_zeros() as usize;
    if bits.len() != width {
        return input(format!(
            "{n_antennas} antennas need {width} bits, got {:?}",
            bits
        ));
    }
    parse_bits(bits)
}

/// A transmit vector with a single active antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxVector {
    pub antenna: usize,
    pub payload: C64,
    pub n_antennas: usize,
}

impl TxVector {
    pub fn to_dense(&self) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); self.n_antennas];
        x[self.antenna] = self.payload;
        x
    }
}

pub fn build_tx_vector(antenna: usize, payload: C64, n_antennas: usize) -> Result<TxVector> {
    if antenna >= n_antennas {
        return input(format!(
            "antenna index {antenna} out of range for {n_antennas} antennas"
        ));
    }
    Ok(TxVector {
        antenna,
        payload,
        n_antennas,
    })
}
