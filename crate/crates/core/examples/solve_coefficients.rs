//! Solve for the Lindbladian `L = c₁K₁ + c₂K₂ + c₃K₃` and rate `α` that keep
//! `⟨H⟩` constant for a few spring rates.

use isolindblad::isoenergetic::solve_oscillator_coefficients;

fn main() {
    for (k, kdot) in [(1.0, -0.2), (4.0, -1.0), (0.3, -3.0), (1.0, 0.0), (1.0, 0.5)] {
        match solve_oscillator_coefficients(k, kdot, 1.0) {
            Ok(s) => println!(
                "k = {k:<4} kdot = {kdot:<5} -> c = ({}, {}, {}), alpha = {}, rays = {}{}",
                s.c1,
                s.c2,
                s.c3,
                s.alpha,
                s.rays,
                if s.trivial { " (no dissipation needed)" } else { "" }
            ),
            Err(e) => println!("k = {k:<4} kdot = {kdot:<5} -> {e}"),
        }
    }
}
