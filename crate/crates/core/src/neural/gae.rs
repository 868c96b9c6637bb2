/// Generalised advantage estimation over one continuing stream.
///
/// `delta_t = r_t + gamma * v_{t+1} - v_t`, `A_t = delta_t + gamma * lambda * A_{t+1}`,
/// where `v_T` is `bootstrap_value`. Returns `(advantages, returns)` with
/// `returns = advantages + values`.
pub fn gae(rewards: &[f64], values: &[f64], bootstrap_value: f64, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len(), "rewards and values differ in length");
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..n).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        next_adv = delta + gamma * lambda * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}
