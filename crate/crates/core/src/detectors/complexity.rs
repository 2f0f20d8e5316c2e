//! Receiver complexity in abstract complex-operation counts.
//!
//! The SSK-NOMA count covers the joint antenna/symbol search of the SSK user
//! plus the ML and SIC stages of every NOMA user. The baseline count covers
//! ML and SIC stages for all users of a single-antenna NOMA downlink.

use crate::error::{input, Result};

/// Number of ML detections and SIC cancellations across all receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub ml_ssk: u64,
    pub sic_ssk: u64,
    pub ml_noma: u64,
    pub sic_noma: u64,
}

pub fn op_counts(users: usize) -> Result<OpCounts> {
    if users < 2 {
        return input(format!("complexity needs at least 2 users, got {users}"));
    }
    let l = users as u64;
    Ok(OpCounts {
        ml_ssk: l - 1,
        sic_ssk: (l - 2) * (l - 1) / 2,
        ml_noma: l,
        sic_noma: l * (l - 1) / 2,
    })
}

/// `orders` holds `M_2..M_L`, the constellation sizes of the NOMA users.
pub fn complexity_ssk_noma(users: usize, orders: &[usize], n_t: usize, n_r: usize) -> Result<u64> {
    if users < 2 || orders.len() != users - 1 {
        return input(format!(
            "SSK-NOMA complexity needs L >= 2 and L-1 orders, got L={users} with {} orders",
            orders.len()
        ));
    }
    let (n_t, n_r) = (n_t as u64, n_r as u64);
    let m: Vec<u64> = orders.iter().map(|&x| x as u64).collect();
    let m_total: u64 = m.iter().product();
    let sm_search = 2 * n_r * n_t + n_t * m_total + m_total;
    let ml: u64 = m.iter().map(|mi| 4 * n_r * mi).sum();
    let sic: u64 = (1..m.len())
        .map(|i| m[..i].iter().map(|mm| 4 * n_r * mm + 2 * n_r).sum::<u64>())
        .sum();
    Ok(sm_search + ml + sic)
}

/// `orders` holds `M_1..M_L`.
pub fn complexity_noma(users: usize, orders: &[usize], n_r: usize) -> Result<u64> {
    if users < 2 || orders.len() != users {
        return input(format!(
            "NOMA complexity needs L >= 2 and L orders, got L={users} with {} orders",
            orders.len()
        ));
    }
    let n_r = n_r as u64;
    let m: Vec<u64> = orders.iter().map(|&x| x as u64).collect();
    let ml: u64 = m.iter().map(|mi| 4 * n_r * mi).sum();
    let sic: u64 = (1..m.len())
        .map(|i| m[..i].iter().map(|mm| 4 * n_r * mm + 2 * n_r).sum::<u64>())
        .sum();
    Ok(ml + sic)
}
