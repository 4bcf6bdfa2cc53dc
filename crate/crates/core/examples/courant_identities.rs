// SPDX-License-Identifier: MIT OR Apache-2.0
//! Dorfman bracket on `TX ⊕ T*X` over ℝ⁴: the Leibniz and pairing identities on random sections.

use gcdeform::cartan::{random_form, random_vf};
use gcdeform::courant::QSection;
use gcdeform::ring::vars;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let v = vars(&["x1", "x2", "x3", "x4"]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut section = || QSection::new(random_vf(&mut rng, &v, 2, 3, 0.3), random_form(&mut rng, &v, 1, 2, 3, 0.3)).expect("1-form");
    let (a, b, c) = (section(), section(), section());

    let leibniz = a.dorfman(&b.dorfman(&c)) == a.dorfman(&b).dorfman(&c).add(&b.dorfman(&a.dorfman(&c)));
    let anchor = a.vf.apply(&b.pairing(&c)) == &a.dorfman(&b).pairing(&c) + &b.pairing(&a.dorfman(&c));
    println!("a∘(b∘c) = (a∘b)∘c + b∘(a∘c): {leibniz}");
    println!("ρ(a)⟨b,c⟩ = ⟨a∘b,c⟩ + ⟨b,a∘c⟩: {anchor}");
    println!("Courant bracket is skew: {}", a.courant(&b) == b.courant(&a).neg());
}
