use super::field::{FieldElement, Scalar};
use crate::u256::U256;

/// `b` in `y^2 = x^3 + b`.
pub const CURVE_B: u64 = 7;

const GX: U256 = U256([
    0x59F2_815B_16F8_1798,
    0x029B_FCDB_2DCE_28D9,
    0x55A0_6295_CE87_0B07,
    0x79BE_667E_F9DC_BBAC,
]);
const GY: U256 = U256([
    0x9C47_D08F_FB10_D4B8,
    0xFD17_B448_A685_5419,
    0x5DA4_FBFC_0E11_08A8,
    0x483A_DA77_26A3_C465,
]);

/// A point on secp256k1 in affine form, or the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Infinity,
    Affine { x: FieldElement, y: FieldElement },
}

impl CurvePoint {
    pub fn generator() -> Self {
        CurvePoint::Affine { x: FieldElement::new(GX), y: FieldElement::new(GY) }
    }

    /// Builds a point from coordinates, rejecting pairs off the curve.
    pub fn from_affine(x: FieldElement, y: FieldElement) -> Option<Self> {
        let p = CurvePoint::Affine { x, y };
        p.is_on_curve().then_some(p)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn is_on_curve(&self) -> bool {
        match *self {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => y.square() == x.square() * x + FieldElement::from_u64(CURVE_B),
        }
    }

    pub fn x(&self) -> Option<FieldElement> {
        match *self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<FieldElement> {
        match *self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { y, .. } => Some(y),
        }
    }

    pub fn negate(&self) -> Self {
        match *self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x, y: -y },
        }
    }

    fn to_jacobian(self) -> Jacobian {
        match self {
            CurvePoint::Infinity => Jacobian::INFINITY,
            CurvePoint::Affine { x, y } => Jacobian { x, y, z: FieldElement::ONE },
        }
    }
}

/// Chord-and-tangent addition in affine coordinates.
pub fn point_add(p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
    let (x1, y1, x2, y2) = match (*p, *q) {
        (CurvePoint::Infinity, other) | (other, CurvePoint::Infinity) => return other,
        (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
    };
    let slope = if x1 == x2 {
        if y1 != y2 || y1.is_zero() {
            return CurvePoint::Infinity;
        }
        let three_x_sq = x1.square() * FieldElement::from_u64(3);
        three_x_sq * (y1 + y1).invert()
    } else {
        (y2 - y1) * (x2 - x1).invert()
    };
    let x3 = slope.square() - x1 - x2;
    let y3 = slope * (x1 - x3) - y1;
    CurvePoint::Affine { x: x3, y: y3 }
}

/// `k * P` by left-to-right double-and-add over Jacobian coordinates.
pub fn scalar_mul(k: &Scalar, p: &CurvePoint) -> CurvePoint {
    integer_mul(&k.value(), p)
}

/// `k * P` for an arbitrary 256-bit integer, without reducing `k` modulo n first.
pub fn integer_mul(bits: &U256, p: &CurvePoint) -> CurvePoint {
    let base = p.to_jacobian();
    let mut acc = Jacobian::INFINITY;
    for i in (0..bits.bits()).rev() {
        acc = acc.double();
        if bits.bit(i) {
            acc = acc.add(&base);
        }
    }
    acc.to_affine()
}

/// `a * G + b * Q` (used by signature verification).
pub(crate) fn double_scalar_mul(a: &Scalar, b: &Scalar, q: &CurvePoint) -> CurvePoint {
    let g = CurvePoint::generator().to_jacobian();
    let q = q.to_jacobian();
    let both = g.add(&q);
    let (av, bv) = (a.value(), b.value());
    let mut acc = Jacobian::INFINITY;
    for i in (0..av.bits().max(bv.bits())).rev() {
        acc = acc.double();
        match (av.bit(i), bv.bit(i)) {
            (true, true) => acc = acc.add(&both),
            (true, false) => acc = acc.add(&g),
            (false, true) => acc = acc.add(&q),
            (false, false) => {}
        }
    }
    acc.to_affine()
}

/// `(X, Y, Z)` representing `(X / Z^2, Y / Z^3)`; `Z = 0` is infinity.
#[derive(Clone, Copy, Debug)]
struct Jacobian {
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
}

impl Jacobian {
    const INFINITY: Jacobian = Jacobian { x: FieldElement::ONE, y: FieldElement::ONE, z: FieldElement::ZERO };

    fn is_infinity(&self) -> bool {
        self.z.is_zero()
    }

    fn double(&self) -> Jacobian {
        if self.is_infinity() || self.y.is_zero() {
            return Jacobian::INFINITY;
        }
        let y_sq = self.y.square();
        let s = self.x * y_sq * FieldElement::from_u64(4);
        let m = self.x.square() * FieldElement::from_u64(3);
        let x3 = m.square() - s - s;
        let y3 = m * (s - x3) - y_sq.square() * FieldElement::from_u64(8);
        let z3 = (self.y + self.y) * self.z;
        Jacobian { x: x3, y: y3, z: z3 }
    }

    fn add(&self, other: &Jacobian) -> Jacobian {
        if self.is_infinity() {
            return *other;
        }
        if other.is_infinity() {
            return *self;
        }
        let z1_sq = self.z.square();
        let z2_sq = other.z.square();
        let u1 = self.x * z2_sq;
        let u2 = other.x * z1_sq;
        let s1 = self.y * z2_sq * other.z;
        let s2 = other.y * z1_sq * self.z;
        if u1 == u2 {
            return if s1 == s2 { self.double() } else { Jacobian::INFINITY };
        }
        let h = u2 - u1;
        let r = s2 - s1;
        let h_sq = h.square();
        let h_cu = h_sq * h;
        let u1_h_sq = u1 * h_sq;
        let x3 = r.square() - h_cu - u1_h_sq - u1_h_sq;
        let y3 = r * (u1_h_sq - x3) - s1 * h_cu;
        let z3 = h * self.z * other.z;
        Jacobian { x: x3, y: y3, z: z3 }
    }

    fn to_affine(self) -> CurvePoint {
        if self.is_infinity() {
            return CurvePoint::Infinity;
        }
        let z_inv = self.z.invert();
        let z_inv_sq = z_inv.square();
        CurvePoint::Affine { x: self.x * z_inv_sq, y: self.y * z_inv_sq * z_inv }
    }
}
