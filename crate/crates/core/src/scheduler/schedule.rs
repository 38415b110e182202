use std::fmt;

use crate::error::{Error, Result};

/// Binary `K × K` adjacency for one slot: entry `(r, k)` means user `r`
/// transmits to user `k`. Construction enforces a zero diagonal and
/// half-duplex operation (a transmitting user receives nothing).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScheduleMatrix {
    users: usize,
    bits: Vec<bool>,
}

fn check_half_duplex(users: usize, bits: &[bool]) -> Result<()> {
    for r in 0..users {
        if bits[r * users + r] {
            return Err(Error::HalfDuplex(format!("self-link at user {r}")));
        }
    }
    for r in 0..users {
        let transmits = (0..users).any(|k| bits[r * users + k]);
        let receives = (0..users).any(|i| bits[i * users + r]);
        if transmits && receives {
            return Err(Error::HalfDuplex(format!("user {r} both transmits and receives")));
        }
    }
    Ok(())
}

impl ScheduleMatrix {
    pub fn empty(users: usize) -> Self {
        Self {
            users,
            bits: vec![false; users * users],
        }
    }

    /// Row-major `users × users` bits.
    pub fn from_bits(users: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != users * users {
            return Err(Error::Shape {
                op: "schedule",
                lhs: vec![users, users],
                rhs: vec![bits.len()],
            });
        }
        check_half_duplex(users, &bits)?;
        Ok(Self { users, bits })
    }

    pub fn from_links(users: usize, links: &[(usize, usize)]) -> Result<Self> {
        let mut bits = vec![false; users * users];
        for &(r, k) in links {
            if r >= users || k >= users {
                return Err(Error::invalid(format!("link ({r}, {k}) outside {users} users")));
            }
            bits[r * users + k] = true;
        }
        Self::from_bits(users, bits)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, r: usize, k: usize) -> bool {
        self.bits[r * self.users + k]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn link_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Scheduled links in row-major order.
    pub fn links(&self) -> Vec<(usize, usize)> {
        (0..self.users)
            .flat_map(|r| (0..self.users).map(move |k| (r, k)))
            .filter(|&(r, k)| self.get(r, k))
            .collect()
    }

    /// Users with at least one outgoing link.
    pub fn transmitters(&self) -> Vec<usize> {
        (0..self.users)
            .filter(|&r| (0..self.users).any(|k| self.get(r, k)))
            .collect()
    }

    pub fn receivers_of(&self, r: usize) -> Vec<usize> {
        (0..self.users).filter(|&k| self.get(r, k)).collect()
    }

    pub fn transmitters_to(&self, k: usize) -> Vec<usize> {
        (0..self.users).filter(|&r| self.get(r, k)).collect()
    }

    /// Every valid schedule for `users` users (the empty one included),
    /// in increasing bit-pattern order.
    pub fn enumerate(users: usize) -> Result<Vec<Self>> {
        let slots: Vec<(usize, usize)> = (0..users)
            .flat_map(|r| (0..users).map(move |k| (r, k)))
            .filter(|(r, k)| r != k)
            .collect();
        if slots.len() > 20 {
            return Err(Error::TooLarge {
                estimate: 2f64.powi(slots.len() as i32),
                limit: 2f64.powi(20),
            });
        }
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << slots.len()) {
            let mut bits = vec![false; users * users];
            for (i, &(r, k)) in slots.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    bits[r * users + k] = true;
                }
            }
            if check_half_duplex(users, &bits).is_ok() {
                out.push(Self { users, bits });
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ScheduleMatrix {
    /// Compact `r->k` list with 0-based user indices, `-` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let links = self.links();
        if links.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = links.iter().map(|(r, k)| format!("{r}->{k}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A set of directed links without the half-duplex restriction, used for
/// relaxed traffic patterns such as all-pairs pretraining.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSet {
    users: usize,
    links: Vec<(usize, usize)>,
}

impl LinkSet {
    pub fn new(users: usize, links: &[(usize, usize)]) -> Result<Self> {
        let mut sorted = links.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::invalid("link set is empty"));
        }
        for &(r, k) in &sorted {
            if r >= users || k >= users || r == k {
                return Err(Error::invalid(format!("bad link ({r}, {k}) for {users} users")));
            }
        }
        Ok(Self { users, links: sorted })
    }

    /// Every ordered pair of distinct users.
    pub fn all_pairs(users: usize) -> Result<Self> {
        let links: Vec<_> = (0..users)
            .flat_map(|r| (0..users).map(move |k| (r, k)))
            .filter(|(r, k)| r != k)
            .collect();
        Self::new(users, &links)
    }

    pub fn from_schedule(s: &ScheduleMatrix) -> Result<Self> {
        Self::new(s.users(), &s.links())
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, r: usize, k: usize) -> bool {
        self.links.binary_search(&(r, k)).is_ok()
    }

    pub fn transmitters(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.links.iter().map(|l| l.0).collect();
        t.dedup();
        t
    }

    pub fn receivers(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.links.iter().map(|l| l.1).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn receivers_of(&self, r: usize) -> Vec<usize> {
        self.links.iter().filter(|l| l.0 == r).map(|l| l.1).collect()
    }

    pub fn transmitters_to(&self, k: usize) -> Vec<usize> {
        self.links.iter().filter(|l| l.1 == k).map(|l| l.0).collect()
    }

    pub fn is_half_duplex(&self) -> bool {
        ScheduleMatrix::from_links(self.users, &self.links).is_ok()
    }
}
