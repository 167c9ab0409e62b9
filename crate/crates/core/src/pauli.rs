//! Pauli strings, weighted Pauli sums, fermionic operators and the
//! Jordan-Wigner mapping onto qubits.
//!
//! Conventions used throughout the crate:
//!
//! - basis index `b = sum_q bit_q 2^q`, so qubit 0 is the least significant
//!   bit and labels such as `"XZI"` list qubit 0 first;
//! - qubit value 1 means the fermionic mode is occupied;
//! - `c_j -> (prod_{i<j} Z_i) (X_j + i Y_j) / 2`;
//! - spin-orbital index `site + n_sites * spin` (all up spins first).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{config_err, dim_err};
use crate::math::{cis, sqrt, PI};
use crate::Result;

/// Coefficients with magnitude below this are dropped on canonicalization.
pub const PRUNE_TOLERANCE: f64 = 1e-14;

/// Largest register a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-qubit Pauli symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// `i^k` for `k` taken mod 4.
#[inline]
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Tensor product of single-qubit Paulis on `n_qubits` qubits.
///
/// Stored in symplectic form: bit `q` of `x` (`z`) is set when the factor on
/// qubit `q` contains an X (Z). A Y factor has both bits set and the string
/// equals `prod_q i^{x_q z_q} X^{x_q} Z^{z_q}`, so every string is Hermitian
/// and squares to the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits), "qubit count must be in 1..=64");
        Self { n_qubits, x: 0, z: 0 }
    }

    /// String with a single non-identity factor.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(dim_err!("qubit {qubit} out of range for {n_qubits} qubits"));
        }
        let mut s = Self::identity(n_qubits);
        s.set(qubit, pauli);
        Ok(s)
    }

    pub fn from_factors(factors: &[Pauli]) -> Self {
        let mut s = Self::identity(factors.len());
        for (q, &p) in factors.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Parses a label such as `"XZIY"` (qubit 0 first).
    pub fn from_label(label: &str) -> Result<Self> {
        let factors = label
            .chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| config_err!("bad Pauli symbol {c:?}")))
            .collect::<Result<Vec<_>>>()?;
        if factors.is_empty() || factors.len() > MAX_QUBITS {
            return Err(config_err!("label length {} out of range", factors.len()));
        }
        Ok(Self::from_factors(&factors))
    }

    /// Builds a string from raw symplectic masks.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        let mask = Self::full_mask(n_qubits);
        if n_qubits == 0 || n_qubits > MAX_QUBITS || x & !mask != 0 || z & !mask != 0 {
            return Err(dim_err!("masks do not fit in {n_qubits} qubits"));
        }
        Ok(Self { n_qubits, x, z })
    }

    fn full_mask(n: usize) -> u64 {
        if n >= 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    fn set(&mut self, qubit: usize, pauli: Pauli) {
        let (xb, zb) = pauli.bits();
        let bit = 1u64 << qubit;
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn factors(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.get(q)).collect()
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).symbol()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let b = b as u64;
        let k = (self.x & self.z).count_ones() + 2 * (b & self.z).count_ones();
        (i_pow(k), (b ^ self.x) as usize)
    }

    /// Operator product `self * other = phase * product`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(dim_err!(
                "cannot multiply {}-qubit and {}-qubit strings",
                self.n_qubits,
                other.n_qubits
            ));
        }
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // X^a Z^b X^c Z^d = (-1)^{b.c} X^{a+c} Z^{b+d}
        let k = (self.x & self.z).count_ones() + (other.x & other.z).count_ones() + 4 * 64 - (x & z).count_ones()
            + 2 * (self.z & other.x).count_ones();
        Ok((
            i_pow(k),
            PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        ))
    }

    /// `self` on the low qubits, `high` on the qubits above them.
    pub fn tensor(&self, high: &PauliString) -> Result<PauliString> {
        let n = self.n_qubits + high.n_qubits;
        if n > MAX_QUBITS {
            return Err(dim_err!("tensor product exceeds {MAX_QUBITS} qubits"));
        }
        Ok(PauliString {
            n_qubits: n,
            x: self.x | high.x << self.n_qubits,
            z: self.z | high.z << self.n_qubits,
        })
    }

    /// Pads the string with identities up to `n_qubits`.
    pub fn widen(&self, n_qubits: usize) -> Result<PauliString> {
        if n_qubits < self.n_qubits || n_qubits > MAX_QUBITS {
            return Err(dim_err!("cannot widen {} to {n_qubits} qubits", self.n_qubits));
        }
        Ok(PauliString { n_qubits, ..*self })
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (phase, b2) = self.apply_to_basis(b);
            m[(b2, b)] = phase;
        }
        m
    }

    fn sort_key(&self, q: usize) -> u8 {
        self.get(q) as u8
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            (0..self.n_qubits)
                .map(|q| self.sort_key(q).cmp(&other.sort_key(q)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Weighted sum of Pauli strings in canonical form: one entry per string,
/// zero coefficients removed, iteration in [`PauliString`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_string(Complex64::new(1.0, 0.0), PauliString::identity(n_qubits))
    }

    pub fn from_string(coeff: Complex64, string: PauliString) -> Self {
        let mut s = Self::zero(string.n_qubits());
        s.add_term(coeff, string).expect("sizes agree by construction");
        s
    }

    /// Collects `(coefficient, string)` pairs, merging duplicates.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, PauliString)>,
    {
        let mut s = Self::zero(n_qubits);
        for (c, p) in terms {
            s.add_term(c, p)?;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn add_term(&mut self, coeff: Complex64, string: PauliString) -> Result<()> {
        if string.n_qubits() != self.n_qubits {
            return Err(dim_err!(
                "term on {} qubits added to {}-qubit sum",
                string.n_qubits(),
                self.n_qubits
            ));
        }
        let entry = self.terms.entry(string).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() < PRUNE_TOLERANCE {
            self.terms.remove(&string);
        }
        Ok(())
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Complex64, &PauliString)> + '_ {
        self.terms.iter().map(|(p, c)| (*c, p))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&PauliString::identity(self.n_qubits))
    }

    /// Non-identity terms in canonical order.
    pub fn non_identity_terms(&self) -> Vec<(Complex64, PauliString)> {
        self.terms
            .iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(p, c)| (*c, *p))
            .collect()
    }

    /// Copy with the identity term removed.
    pub fn without_identity(&self) -> PauliSum {
        let mut s = self.clone();
        s.terms.remove(&PauliString::identity(self.n_qubits));
        s
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut s = Self::zero(self.n_qubits);
        for (c, p) in self.terms() {
            s.add_term(c * factor, *p).expect("same size");
        }
        s
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut s = self.clone();
        for (c, p) in other.terms() {
            s.add_term(c, *p)?;
        }
        Ok(s)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(dim_err!(
                "cannot multiply {}-qubit and {}-qubit sums",
                self.n_qubits,
                other.n_qubits
            ));
        }
        let mut s = Self::zero(self.n_qubits);
        for (a, pa) in self.terms() {
            for (b, pb) in other.terms() {
                let (phase, p) = pa.multiply(pb)?;
                s.add_term(a * b * phase, p)?;
            }
        }
        Ok(s)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn adjoint(&self) -> PauliSum {
        let mut s = Self::zero(self.n_qubits);
        for (c, p) in self.terms() {
            s.add_term(c.conj(), *p).expect("same size");
        }
        s
    }

    /// True when every coefficient is real within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms().all(|(c, _)| c.im.abs() <= tol)
    }

    /// Splits `self = A + iB` with `A`, `B` Hermitian.
    pub fn hermitian_parts(&self) -> (PauliSum, PauliSum) {
        let mut a = Self::zero(self.n_qubits);
        let mut b = Self::zero(self.n_qubits);
        for (c, p) in self.terms() {
            a.add_term(Complex64::new(c.re, 0.0), *p).expect("same size");
            b.add_term(Complex64::new(c.im, 0.0), *p).expect("same size");
        }
        (a, b)
    }

    /// Embeds the sum into a larger register (identities on the new qubits).
    pub fn widen(&self, n_qubits: usize) -> Result<PauliSum> {
        let mut s = Self::zero(n_qubits);
        for (c, p) in self.terms() {
            s.add_term(c, p.widen(n_qubits)?)?;
        }
        Ok(s)
    }

    /// Sum of absolute coefficient values, an upper bound on the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms().map(|(c, _)| c.norm()).sum()
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in self.terms() {
            for b in 0..dim {
                let (phase, b2) = p.apply_to_basis(b);
                m[(b2, b)] += c * phase;
            }
        }
        m
    }

    /// `out = self * amps` for a dense amplitude vector.
    pub fn apply_to(&self, amps: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = 1usize << self.n_qubits;
        if amps.len() != dim || out.len() != dim {
            return Err(dim_err!(
                "operator on {} qubits applied to a vector of length {}",
                self.n_qubits,
                amps.len()
            ));
        }
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (c, p) in self.terms() {
            for (b, &a) in amps.iter().enumerate() {
                let (phase, b2) = p.apply_to_basis(b);
                out[b2] += c * phase * a;
            }
        }
        Ok(())
    }
}

impl fmt::Display for PauliSum {
    /// One term per line: `(re+imi) * "LABEL"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, p) in self.terms() {
            writeln!(f, "({:+.15e}{:+.15e}i) * \"{}\"", c.re, c.im, p)?;
        }
        Ok(())
    }
}

/// One creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

/// Linear combination of products of ladder operators, kept in the order
/// written (no normal ordering).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionOperator {
    pub terms: Vec<(Complex64, Vec<Ladder>)>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: Complex64) -> Self {
        Self {
            terms: vec![(c, Vec::new())],
        }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self::product(Complex64::new(1.0, 0.0), &[(mode, false)])
    }

    pub fn create(mode: usize) -> Self {
        Self::product(Complex64::new(1.0, 0.0), &[(mode, true)])
    }

    /// `n_mode = c_mode^dagger c_mode`.
    pub fn number(mode: usize) -> Self {
        Self::product(Complex64::new(1.0, 0.0), &[(mode, true), (mode, false)])
    }

    /// Single product term, factors written left to right as `(mode, dagger)`.
    pub fn product(coeff: Complex64, factors: &[(usize, bool)]) -> Self {
        Self {
            terms: vec![(
                coeff,
                factors.iter().map(|&(mode, dagger)| Ladder { mode, dagger }).collect(),
            )],
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(mut self, other: FermionOperator) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for (c, _) in &mut self.terms {
            *c *= factor;
        }
        self
    }

    pub fn mul(&self, other: &FermionOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let mut f = fa.clone();
                f.extend_from_slice(fb);
                terms.push((a * b, f));
            }
        }
        Self { terms }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(c, f)| {
                    (
                        c.conj(),
                        f.iter()
                            .rev()
                            .map(|l| Ladder {
                                mode: l.mode,
                                dagger: !l.dagger,
                            })
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    /// Largest mode index referenced, if any.
    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|(_, f)| f.iter().map(|l| l.mode)).max()
    }
}

/// Qubit image of a single ladder operator.
fn jw_ladder(l: Ladder, n_modes: usize) -> Result<PauliSum> {
    let mut x_part = PauliString::identity(n_modes);
    for q in 0..l.mode {
        x_part.set(q, Pauli::Z);
    }
    let mut y_part = x_part;
    x_part.set(l.mode, Pauli::X);
    y_part.set(l.mode, Pauli::Y);
    let y_coeff = if l.dagger { -I * 0.5 } else { I * 0.5 };
    PauliSum::from_terms(n_modes, [(Complex64::new(0.5, 0.0), x_part), (y_coeff, y_part)])
}

/// Jordan-Wigner image of a fermion operator on `n_modes` qubits.
pub fn jordan_wigner(op: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    if n_modes == 0 || n_modes > MAX_QUBITS {
        return Err(dim_err!("mode count {n_modes} out of range"));
    }
    if let Some(m) = op.max_mode() {
        if m >= n_modes {
            return Err(dim_err!("mode {m} out of range for {n_modes} modes"));
        }
    }
    let mut total = PauliSum::zero(n_modes);
    for (c, factors) in &op.terms {
        let mut prod = PauliSum::from_string(*c, PauliString::identity(n_modes));
        for &l in factors {
            prod = prod.mul(&jw_ladder(l, n_modes)?)?;
        }
        total = total.add(&prod)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Lattice of the Hubbard model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// 1-D chain; `periodic` adds the bond between the last and first site
    /// when the chain has more than two sites.
    Chain { periodic: bool },
    /// Open-boundary square lattice; `n_sites` must be a perfect square.
    Square,
}

/// Fermi-Hubbard model
/// `H = -t sum_<ij>,s (c+_is c_js + h.c.) + U sum_i n_iu n_id [- U/2 sum_is n_is]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardModel {
    pub n_sites: usize,
    pub geometry: Geometry,
    pub hopping: f64,
    pub interaction: f64,
    pub particle_hole_shift: bool,
}

impl HubbardModel {
    /// Two-site model with `t = 1` and the particle-hole shift.
    pub fn two_site(interaction: f64) -> Self {
        Self {
            n_sites: 2,
            geometry: Geometry::Chain { periodic: false },
            hopping: 1.0,
            interaction,
            particle_hole_shift: true,
        }
    }

    /// Periodic four-site ring with `t = 1` and the particle-hole shift.
    pub fn four_site_ring(interaction: f64) -> Self {
        Self {
            n_sites: 4,
            geometry: Geometry::Chain { periodic: true },
            hopping: 1.0,
            interaction,
            particle_hole_shift: true,
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_sites
    }

    /// Spin-orbital index of `(site, spin)`.
    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        site + self.n_sites * spin.index()
    }

    fn square_side(&self) -> Option<usize> {
        let side = libm::round(sqrt(self.n_sites as f64)) as usize;
        (side * side == self.n_sites).then_some(side)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(config_err!("a Hubbard model needs at least one site"));
        }
        if self.n_qubits() > MAX_QUBITS {
            return Err(config_err!("{} sites exceed the register limit", self.n_sites));
        }
        if !self.hopping.is_finite() || !self.interaction.is_finite() {
            return Err(config_err!("model parameters must be finite"));
        }
        if self.geometry == Geometry::Square && self.square_side().is_none() {
            return Err(config_err!(
                "square geometry needs a perfect-square site count, got {}",
                self.n_sites
            ));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j`, each listed once.
    pub fn bonds(&self) -> Result<Vec<(usize, usize)>> {
        self.validate()?;
        let n = self.n_sites;
        let mut bonds = Vec::new();
        match self.geometry {
            Geometry::Chain { periodic } => {
                for i in 0..n.saturating_sub(1) {
                    bonds.push((i, i + 1));
                }
                if periodic && n > 2 {
                    bonds.push((0, n - 1));
                }
            }
            Geometry::Square => {
                let side = self.square_side().expect("validated");
                for r in 0..side {
                    for c in 0..side {
                        let i = r * side + c;
                        if c + 1 < side {
                            bonds.push((i, i + 1));
                        }
                        if r + 1 < side {
                            bonds.push((i, i + side));
                        }
                    }
                }
            }
        }
        Ok(bonds)
    }

    /// Allowed momenta `2 pi m / L` of a chain, `m = 0..L`.
    pub fn momenta(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match self.geometry {
            Geometry::Chain { .. } => Ok((0..self.n_sites)
                .map(|m| 2.0 * PI * m as f64 / self.n_sites as f64)
                .collect()),
            Geometry::Square => Err(config_err!("momentum modes are only provided for chain geometries")),
        }
    }

    /// Qubit Hamiltonian (Jordan-Wigner image of [`build_hubbard`]).
    pub fn qubit_hamiltonian(&self) -> Result<PauliSum> {
        jordan_wigner(&build_hubbard(self)?, self.n_qubits())
    }
}

/// Fermionic Hubbard Hamiltonian of `model`.
pub fn build_hubbard(model: &HubbardModel) -> Result<FermionOperator> {
    let bonds = model.bonds()?;
    let one = Complex64::new(1.0, 0.0);
    let mut h = FermionOperator::zero();
    for spin in [Spin::Up, Spin::Down] {
        for &(i, j) in &bonds {
            let (a, b) = (model.mode(i, spin), model.mode(j, spin));
            let hop = Complex64::new(-model.hopping, 0.0);
            h = h
                .add(FermionOperator::product(hop, &[(a, true), (b, false)]))
                .add(FermionOperator::product(hop, &[(b, true), (a, false)]));
        }
    }
    for i in 0..model.n_sites {
        let (u, d) = (model.mode(i, Spin::Up), model.mode(i, Spin::Down));
        h = h.add(FermionOperator::product(
            one * model.interaction,
            &[(u, true), (u, false), (d, true), (d, false)],
        ));
    }
    if model.particle_hole_shift {
        let mu = Complex64::new(-model.interaction / 2.0, 0.0);
        for i in 0..model.n_sites {
            for spin in [Spin::Up, Spin::Down] {
                h = h.add(FermionOperator::number(model.mode(i, spin)).scale(mu));
            }
        }
    }
    Ok(h)
}

/// `c_{k,s} = L^{-1/2} sum_j e^{ikj} c_{j,s}` for a chain.
pub fn momentum_mode(model: &HubbardModel, k: f64, spin: Spin) -> Result<FermionOperator> {
    let grid = model.momenta()?;
    let two_pi = 2.0 * PI;
    let reduced = k - two_pi * libm::floor(k / two_pi);
    let on_grid = grid.iter().any(|&g| {
        let d = (reduced - g).abs();
        d < 1e-9 || (two_pi - d) < 1e-9
    });
    if !on_grid || !k.is_finite() {
        return Err(config_err!(
            "k = {k} is not an allowed momentum of the {}-site chain",
            model.n_sites
        ));
    }
    let norm = 1.0 / sqrt(model.n_sites as f64);
    let mut op = FermionOperator::zero();
    for j in 0..model.n_sites {
        let phase = cis(k * j as f64) * norm;
        op = op.add(FermionOperator::annihilate(model.mode(j, spin)).scale(phase));
    }
    Ok(op)
}

/// Total particle number `sum_q (1 - Z_q) / 2` on `n_modes` qubits.
pub fn number_operator(n_modes: usize) -> Result<PauliSum> {
    let mut op = FermionOperator::zero();
    for m in 0..n_modes {
        op = op.add(FermionOperator::number(m));
    }
    jordan_wigner(&op, n_modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_mat_close, rand_pauli_string};
    use proptest::prelude::*;

    fn ps(label: &str) -> PauliString {
        PauliString::from_label(label).unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let (ph, p) = ps("XI").multiply(&ps("YI")).unwrap();
        assert_eq!(ph, I);
        assert_eq!(p, ps("ZI"));
        let (ph, p) = ps("ZZ").multiply(&ps("ZZ")).unwrap();
        assert_eq!(ph, Complex64::new(1.0, 0.0));
        assert_eq!(p, ps("II"));
        let (ph, p) = ps("ZI").multiply(&ps("XI")).unwrap();
        assert_eq!(ph, I);
        assert_eq!(p, ps("YI"));
    }

    #[test]
    fn multiply_size_mismatch() {
        assert!(matches!(ps("X").multiply(&ps("XX")), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn strings_are_hermitian_involutions() {
        for label in ["X", "Y", "Z", "XYZ", "YYIZ", "ZXYIXY"] {
            let m = ps(label).dense();
            assert_mat_close(&m, &m.adjoint(), 0.0);
            let dim = m.nrows();
            assert_mat_close(&(&m * &m), &DMatrix::identity(dim, dim), 0.0);
        }
    }

    proptest! {
        #[test]
        fn multiply_matches_dense(seed in any::<u64>(), n in 1usize..=4) {
            let mut rng = crate::testutil::rng(seed);
            let a = rand_pauli_string(&mut rng, n);
            let b = rand_pauli_string(&mut rng, n);
            let c = rand_pauli_string(&mut rng, n);
            let (ph, ab) = a.multiply(&b).unwrap();
            let expect = a.dense() * b.dense();
            assert_mat_close(&(ab.dense() * ph), &expect, 1e-15);
            // associativity including phases
            let (p1, abc1) = ab.multiply(&c).unwrap();
            let (bc_ph, bc) = b.multiply(&c).unwrap();
            let (p2, abc2) = a.multiply(&bc).unwrap();
            prop_assert_eq!(abc1, abc2);
            prop_assert!((ph * p1 - bc_ph * p2).norm() < 1e-15);
        }
    }

    #[test]
    fn canonical_merging_and_pruning() {
        let one = Complex64::new(1.0, 0.0);
        let s = PauliSum::from_terms(
            2,
            [
                (one, ps("XZ")),
                (one * 2.0, ps("XZ")),
                (one, ps("ZI")),
                (-one, ps("ZI")),
            ],
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&ps("XZ")), one * 3.0);
        let tiny = PauliSum::from_terms(1, [(one * 1e-15, ps("X"))]).unwrap();
        assert!(tiny.is_empty());
    }

    #[test]
    fn sum_dense_is_linear() {
        let one = Complex64::new(1.0, 0.0);
        let s = PauliSum::from_terms(2, [(one * 0.5, ps("XY")), (I * 2.0, ps("ZI"))]).unwrap();
        let expect = ps("XY").dense() * (one * 0.5) + ps("ZI").dense() * (I * 2.0);
        assert_mat_close(&s.dense(), &expect, 1e-15);
    }

    #[test]
    fn text_dump_one_line_per_term() {
        let one = Complex64::new(1.0, 0.0);
        let s = PauliSum::from_terms(2, [(one, ps("ZZ")), (-one * 0.5, ps("XX"))]).unwrap();
        let text = alloc::format!("{s}");
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].ends_with("* \"XX\""));
        assert!(lines[1].starts_with("(+1.000000000000000e0+0.000000000000000e0i)"));
    }

    #[test]
    fn jw_single_modes() {
        let c0 = jordan_wigner(&FermionOperator::annihilate(0), 2).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let expect = PauliSum::from_terms(2, [(half, ps("XI")), (I * 0.5, ps("YI"))]).unwrap();
        assert_eq!(c0, expect);
        let c1 = jordan_wigner(&FermionOperator::annihilate(1), 2).unwrap();
        let expect = PauliSum::from_terms(2, [(half, ps("ZX")), (I * 0.5, ps("ZY"))]).unwrap();
        assert_eq!(c1, expect);
    }

    #[test]
    fn jw_annihilator_lowers_occupation() {
        // |1> on qubit 0 is occupied; c_0 maps it to vacuum
        let c0 = jordan_wigner(&FermionOperator::annihilate(0), 1).unwrap().dense();
        assert!((c0[(0, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(c0[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn jw_out_of_range() {
        assert!(matches!(
            jordan_wigner(&FermionOperator::annihilate(3), 3),
            Err(crate::Error::Dimension(_))
        ));
    }

    #[test]
    fn jw_anticommutator_expansion_is_identity() {
        let c = FermionOperator::annihilate(0);
        let cd = FermionOperator::create(0);
        let anti = c.mul(&cd).add(cd.mul(&c));
        assert_eq!(jordan_wigner(&anti, 3).unwrap(), PauliSum::identity(3));
    }

    #[test]
    fn canonical_anticommutation_dense() {
        let n = 4;
        let ops: Vec<_> = (0..n)
            .map(|m| jordan_wigner(&FermionOperator::annihilate(m), n).unwrap().dense())
            .collect();
        let dim = 1 << n;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let zero = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                let cj_dag = ops[j].adjoint();
                let a = &ops[i] * &cj_dag + &cj_dag * &ops[i];
                let expect = if i == j { id.clone() } else { zero.clone() };
                assert_mat_close(&a, &expect, 0.0);
                let b = &ops[i] * &ops[j] + &ops[j] * &ops[i];
                assert_mat_close(&b, &zero, 0.0);
            }
        }
    }

    #[test]
    fn two_site_hubbard_has_six_terms() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        assert_eq!(h.non_identity_terms().len(), 6);
        assert!(h.is_hermitian(1e-14));
        assert!((h.identity_coefficient().re + 1.5).abs() < 1e-14);
    }

    #[test]
    fn four_site_ring_has_twenty_terms() {
        let h = HubbardModel::four_site_ring(6.0).qubit_hamiltonian().unwrap();
        assert_eq!(h.non_identity_terms().len(), 20);
    }

    #[test]
    fn square_geometry_validation() {
        let mut m = HubbardModel::two_site(1.0);
        m.geometry = Geometry::Square;
        m.n_sites = 3;
        assert!(matches!(build_hubbard(&m), Err(crate::Error::Config(_))));
        m.n_sites = 4;
        assert_eq!(m.bonds().unwrap().len(), 4);
        m.n_sites = 9;
        assert_eq!(m.bonds().unwrap().len(), 12);
    }

    #[test]
    fn hubbard_commutes_with_number() {
        for model in [HubbardModel::two_site(3.0), HubbardModel::four_site_ring(6.0)] {
            let h = model.qubit_hamiltonian().unwrap();
            let n = number_operator(model.n_qubits()).unwrap();
            assert!(h.commutator(&n).unwrap().is_empty());
            let hd = h.dense();
            assert_mat_close(&hd, &hd.adjoint(), 1e-14);
        }
    }

    #[test]
    fn momentum_modes_two_site() {
        let m = HubbardModel::two_site(3.0);
        let r = FRAC_1_SQRT_2_C;
        let k0 = momentum_mode(&m, 0.0, Spin::Up).unwrap();
        let expect = FermionOperator::annihilate(0)
            .scale(r)
            .add(FermionOperator::annihilate(1).scale(r));
        let diff = jordan_wigner(&k0, 4)
            .unwrap()
            .sub(&jordan_wigner(&expect, 4).unwrap())
            .unwrap();
        assert!(diff.l1_norm() < 1e-15);
        let kpi = momentum_mode(&m, PI, Spin::Up).unwrap();
        let expect = FermionOperator::annihilate(0)
            .scale(r)
            .add(FermionOperator::annihilate(1).scale(-r));
        let image = jordan_wigner(&kpi, 4).unwrap();
        let diff = image.sub(&jordan_wigner(&expect, 4).unwrap()).unwrap();
        assert!(diff.l1_norm() < 1e-15);
        // X0, Y0, Z0X1, Z0Y1
        assert_eq!(image.len(), 4);
        let anti = image.anticommutator(&image.adjoint()).unwrap();
        assert!(anti.sub(&PauliSum::identity(4)).unwrap().l1_norm() < 1e-14);
    }

    #[test]
    fn momentum_off_grid() {
        let m = HubbardModel::two_site(3.0);
        assert!(matches!(momentum_mode(&m, 1.0, Spin::Up), Err(crate::Error::Config(_))));
        assert!(momentum_mode(&m, -PI, Spin::Down).is_ok());
    }

    const FRAC_1_SQRT_2_C: Complex64 = Complex64::new(crate::math::FRAC_1_SQRT_2, 0.0);
}
