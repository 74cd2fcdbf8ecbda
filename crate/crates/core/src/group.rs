//! A minimal group interface shared by words, wreath products and the
//! free-word evaluator.

/// Multiplication, inversion and identity for a concrete group.
pub trait GroupOps {
    type Elem: Clone + PartialEq;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn id(&self) -> Self::Elem;

    fn is_id(&self, a: &Self::Elem) -> bool {
        *a == self.id()
    }

    /// `[a, b] = a⁻¹ b⁻¹ a b`.
    fn comm(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let ab = self.mul(a, b);
        let inv = self.mul(&self.inv(a), &self.inv(b));
        self.mul(&inv, &ab)
    }

    /// `a^k` by repeated squaring.
    fn pow(&self, a: &Self::Elem, k: u64) -> Self::Elem {
        let mut acc = self.id();
        let mut base = a.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }
}
