//! Exponential integral, the one special function the closed forms need.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// e^{−x}·Ei(x) for x > 0, without overflow at large x.
pub fn ei_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "ei_scaled is defined here only for x > 0");
    if x < 40.0 {
        ei_series(x) * (-x).exp()
    } else {
        // asymptotic: Ei(x) ~ e^x/x · Σ k!/x^k, truncated at the smallest term
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let next = term * k as f64 / x;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / x
    }
}

/// Ei(x) for x > 0.
pub fn ei(x: f64) -> f64 {
    if x < 40.0 {
        ei_series(x)
    } else {
        ei_scaled(x) * x.exp()
    }
}

fn ei_series(x: f64) -> f64 {
    // γ + ln x + Σ x^k/(k·k!); all terms positive, so no cancellation for x > 0
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        pow *= x / kf;
        let term = pow / kf;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}
