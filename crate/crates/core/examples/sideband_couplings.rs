use ionsynth::iontools::{laguerre, sideband_coupling, stark_shifts};
use ionsynth::TrapParams;

fn main() {
    let eta = 0.4;
    println!(" n   L0_n(4eta^2)   kappa(n)   sqrt(n+1)");
    for n in 0..8 {
        println!(
            "{n:>2} {:>13.8} {:>10.6} {:>11.6}",
            laguerre(n, 0, 4.0 * eta * eta),
            sideband_coupling(n, eta),
            ((n + 1) as f64).sqrt()
        );
    }

    let params = TrapParams::new(7).with_eta(eta, eta).with_chi_ratio(1.0);
    let shifts = stark_shifts(&params);
    let gaps: Vec<String> = shifts
        .windows(2)
        .map(|w| format!("{:.4}", (w[1] - w[0]).abs()))
        .collect();
    println!("Stark shifts / chi: {:.4?}", shifts);
    println!("neighbour gaps / chi: [{}]", gaps.join(", "));
}
