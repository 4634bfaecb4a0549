//! Tiny 2-vector helpers.

use crate::real::Real;

pub type Vec2<R> = [R; 2];

#[inline]
pub fn dot<R: Real>(a: Vec2<R>, b: Vec2<R>) -> R {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm<R: Real>(a: Vec2<R>) -> R {
    dot(a, a).sqrt()
}
