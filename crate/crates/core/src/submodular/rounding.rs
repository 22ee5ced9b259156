use rand::Rng;

const SNAP: f64 = 1e-9;

fn is_fractional(v: f64) -> bool {
    v > SNAP && v < 1.0 - SNAP
}

/// Dependent rounding of one part.
///
/// Two fractional coordinates at a time exchange mass so that one of them
/// becomes integral, with probabilities chosen so each coordinate keeps its
/// expectation. The part sum is preserved until at most one fractional
/// coordinate is left, which is then rounded on its own; hence the number of
/// ones never exceeds the ceiling of the fractional sum. Pairs are always
/// taken as the two lowest fractional indices, so the output is a fixed
/// function of the random stream.
pub fn dependent_rounding<R: Rng + ?Sized>(fractional: &[f64], rng: &mut R) -> Vec<bool> {
    let mut v: Vec<f64> = fractional.iter().map(|&a| a.clamp(0.0, 1.0)).collect();
    loop {
        let mut frac = v.iter().enumerate().filter(|(_, &a)| is_fractional(a)).map(|(k, _)| k);
        let (Some(a), b) = (frac.next(), frac.next()) else { break };
        let Some(b) = b else {
            v[a] = if rng.gen::<f64>() < v[a] { 1.0 } else { 0.0 };
            break;
        };
        let up = (1.0 - v[a]).min(v[b]);
        let down = v[a].min(1.0 - v[b]);
        if rng.gen::<f64>() * (up + down) < down {
            v[a] += up;
            v[b] -= up;
        } else {
            v[a] -= down;
            v[b] += down;
        }
        for k in [a, b] {
            if !is_fractional(v[k]) {
                v[k] = v[k].round();
            }
        }
    }
    v.into_iter().map(|a| a > 0.5).collect()
}

/// Rounds each part independently with [`dependent_rounding`].
pub fn dependent_rounding_parts<R: Rng + ?Sized>(parts: &[Vec<f64>], rng: &mut R) -> Vec<Vec<bool>> {
    parts.iter().map(|p| dependent_rounding(p, rng)).collect()
}
