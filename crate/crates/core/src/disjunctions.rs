//! Disjunctions over `n` boolean variables, labeled streams, and the
//! brute-force hindsight oracle.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n` for which all `3^n` disjunctions are enumerated.
pub const DISJUNCTION_MAX_N: usize = 10;

/// `OR_{i in P} x(i)  OR  OR_{i in N} NOT x(i)`, indices 1-based. The empty
/// disjunction is the constant 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Disjunction {
    positive: BTreeSet<usize>,
    negative: BTreeSet<usize>,
}

impl Disjunction {
    pub fn new(
        n: usize,
        positive: impl IntoIterator<Item = usize>,
        negative: impl IntoIterator<Item = usize>,
    ) -> Result<Disjunction> {
        let positive: BTreeSet<usize> = positive.into_iter().collect();
        let negative: BTreeSet<usize> = negative.into_iter().collect();
        if let Some(i) = positive.intersection(&negative).next() {
            return Err(Error::InvalidInput(format!("index {i} is both positive and negative")));
        }
        if let Some(i) = positive.iter().chain(&negative).find(|&&i| i == 0 || i > n) {
            return Err(Error::InvalidInput(format!("index {i} outside 1..={n}")));
        }
        Ok(Disjunction { positive, negative })
    }

    pub fn empty() -> Disjunction {
        Disjunction::default()
    }

    /// Parses the [`Display`](fmt::Display) form: `0`, or literals `x<i>` and
    /// `!x<i>` joined by `|`.
    pub fn parse(n: usize, text: &str) -> Result<Disjunction> {
        let text = text.trim();
        if text == "0" || text.is_empty() {
            return Ok(Disjunction::empty());
        }
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for lit in text.split('|') {
            let lit = lit.trim();
            let (list, rest) = match lit.strip_prefix('!') {
                Some(r) => (&mut neg, r),
                None => (&mut pos, lit),
            };
            let index = rest
                .strip_prefix('x')
                .and_then(|i| i.parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad literal {lit:?}")))?;
            list.push(index);
        }
        Disjunction::new(n, pos, neg)
    }

    pub fn positive(&self) -> &BTreeSet<usize> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<usize> {
        &self.negative
    }

    /// Relevant indices in increasing order, each with `true` if positive.
    pub fn relevant(&self) -> Vec<(usize, bool)> {
        let mut out: Vec<(usize, bool)> =
            self.positive.iter().map(|&i| (i, true)).chain(self.negative.iter().map(|&i| (i, false))).collect();
        out.sort();
        out
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.positive.iter().any(|&i| x[i - 1]) || self.negative.iter().any(|&i| !x[i - 1])
    }
}

impl fmt::Display for Disjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> = self
            .relevant()
            .into_iter()
            .map(|(i, pos)| if pos { format!("x{i}") } else { format!("!x{i}") })
            .collect();
        if lits.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&lits.join("|"))
        }
    }
}

/// Every disjunction over `n` variables: each index is absent, positive or
/// negative.
pub fn enumerate_disjunctions(n: usize) -> Result<impl Iterator<Item = Disjunction>> {
    if n > DISJUNCTION_MAX_N {
        return Err(Error::TooLarge { what: format!("3^{n} disjunctions"), cap: DISJUNCTION_MAX_N });
    }
    Ok((0..3usize.pow(n as u32)).map(move |code| {
        let mut c = code;
        let mut d = Disjunction::empty();
        for i in 1..=n {
            match c % 3 {
                1 => {
                    d.positive.insert(i);
                }
                2 => {
                    d.negative.insert(i);
                }
                _ => {}
            }
            c /= 3;
        }
        d
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StreamSource {
    File,
    IidRealizable { target: String, seed: u64 },
    IidNoisy { target: String, flip: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledStream {
    pub n: usize,
    pub rounds: Vec<(Vec<bool>, bool)>,
    pub source: StreamSource,
}

impl LabeledStream {
    pub fn new(n: usize, rounds: Vec<(Vec<bool>, bool)>, source: StreamSource) -> Result<LabeledStream> {
        if let Some(t) = rounds.iter().position(|(x, _)| x.len() != n) {
            return Err(Error::InvalidInput(format!("round {} has {} inputs, expected {n}", t + 1, rounds[t].0.len())));
        }
        Ok(LabeledStream { n, rounds, source })
    }

    /// Inputs drawn independently per coordinate with `P[x(i) = 1] = probs[i]`
    /// and labeled by `target`.
    pub fn iid_realizable(target: &Disjunction, probs: &[f64], rounds: usize, seed: u64) -> Result<LabeledStream> {
        let source = StreamSource::IidRealizable { target: target.to_string(), seed };
        Self::generate(target, probs, rounds, seed, 0.0, source)
    }

    /// As [`LabeledStream::iid_realizable`], each label flipped with probability `flip`.
    pub fn iid_noisy(target: &Disjunction, probs: &[f64], flip: f64, rounds: usize, seed: u64) -> Result<LabeledStream> {
        if !(0.0..0.5).contains(&flip) {
            return Err(Error::InvalidInput(format!("flip probability {flip} outside [0, 1/2)")));
        }
        let source = StreamSource::IidNoisy { target: target.to_string(), flip, seed };
        Self::generate(target, probs, rounds, seed, flip, source)
    }

    fn generate(
        target: &Disjunction,
        probs: &[f64],
        rounds: usize,
        seed: u64,
        flip: f64,
        source: StreamSource,
    ) -> Result<LabeledStream> {
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!("coordinate probability {p} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rounds = (0..rounds)
            .map(|_| {
                let x: Vec<bool> = probs.iter().map(|&p| rng.gen_bool(p)).collect();
                let y = target.eval(&x) ^ (flip > 0.0 && rng.gen_bool(flip));
                (x, y)
            })
            .collect();
        LabeledStream::new(probs.len(), rounds, source)
    }

    /// One line per round: `n` space-separated bits, then the label bit.
    pub fn parse(text: &str) -> Result<LabeledStream> {
        let mut rounds = Vec::new();
        let mut n = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bits: Vec<bool> = line
                .split_whitespace()
                .map(|tok| match tok {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(Error::Parse { line: i + 1, message: format!("expected 0 or 1, got {tok:?}") }),
                })
                .collect::<Result<_>>()?;
            let Some((&y, x)) = bits.split_last() else { continue };
            match n {
                None => n = Some(x.len()),
                Some(m) if m != x.len() => {
                    return Err(Error::Parse { line: i + 1, message: format!("expected {m} inputs, got {}", x.len()) })
                }
                _ => {}
            }
            rounds.push((x.to_vec(), y));
        }
        let n = n.ok_or(Error::Parse { line: 0, message: "empty stream".into() })?;
        LabeledStream::new(n, rounds, StreamSource::File)
    }

    pub fn to_text(&self) -> String {
        self.rounds
            .iter()
            .map(|(x, y)| {
                let mut fields: Vec<&str> = x.iter().map(|&b| if b { "1" } else { "0" }).collect();
                fields.push(if *y { "1" } else { "0" });
                fields.join(" ") + "\n"
            })
            .collect()
    }

    pub fn mistakes(&self, phi: &Disjunction) -> usize {
        self.rounds.iter().filter(|(x, y)| phi.eval(x) != *y).count()
    }
}

/// The disjunction with fewest mistakes on the stream; ties go to the
/// smallest `(P, N)`.
pub fn best_disjunction(stream: &LabeledStream) -> Result<(Disjunction, usize)> {
    let mut best: Option<(Disjunction, usize)> = None;
    for phi in enumerate_disjunctions(stream.n)? {
        let errs = stream.mistakes(&phi);
        let better = match &best {
            None => true,
            Some((b, e)) => errs < *e || (errs == *e && phi < *b),
        };
        if better {
            best = Some((phi, errs));
        }
    }
    Ok(best.expect("at least the empty disjunction"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_cases() {
        assert!(!Disjunction::empty().eval(&[true, true]));
        let p1 = Disjunction::new(3, [1], []).unwrap();
        assert!(p1.eval(&[true, false, false]));
        assert!(!p1.eval(&[false, true, true]));
        let n2 = Disjunction::new(3, [], [2]).unwrap();
        assert!(n2.eval(&[true, false, true]));
        assert!(!n2.eval(&[false, true, false]));
    }

    #[test]
    fn construction_rejects_bad_indices() {
        assert!(Disjunction::new(3, [1], [1]).is_err());
        assert!(Disjunction::new(3, [4], []).is_err());
        assert!(Disjunction::new(3, [0], []).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_disjunctions(0).unwrap().count(), 1);
        assert_eq!(enumerate_disjunctions(1).unwrap().count(), 3);
        let all: BTreeSet<_> = enumerate_disjunctions(3).unwrap().collect();
        assert_eq!(all.len(), 27);
        assert!(enumerate_disjunctions(11).is_err());
    }

    #[test]
    fn best_on_all_zero_labels() {
        let s = LabeledStream::new(2, vec![(vec![true, true], false); 5], StreamSource::File).unwrap();
        let (phi, errs) = best_disjunction(&s).unwrap();
        assert_eq!(errs, 0);
        assert_eq!(phi, Disjunction::empty());
    }

    #[test]
    fn realizable_stream_has_zero_error_optimum() {
        let target = Disjunction::new(4, [2], [4]).unwrap();
        let s = LabeledStream::iid_realizable(&target, &[0.5; 4], 200, 9).unwrap();
        assert_eq!(s.mistakes(&target), 0);
        assert_eq!(best_disjunction(&s).unwrap().1, 0);
    }

    #[test]
    fn best_matches_independent_recount() {
        let target = Disjunction::new(3, [1], [3]).unwrap();
        let s = LabeledStream::iid_noisy(&target, &[0.5; 3], 0.25, 20, 4).unwrap();
        let (phi, errs) = best_disjunction(&s).unwrap();
        // Second evaluator: literal truth table per round.
        let recount = |d: &Disjunction| {
            let mut e = 0;
            for (x, y) in &s.rounds {
                let mut v = false;
                for (i, &xi) in x.iter().enumerate() {
                    if (d.positive().contains(&(i + 1)) && xi) || (d.negative().contains(&(i + 1)) && !xi) {
                        v = true;
                    }
                }
                e += usize::from(v != *y);
            }
            e
        };
        assert_eq!(recount(&phi), errs);
        let min = enumerate_disjunctions(3).unwrap().map(|d| recount(&d)).min().unwrap();
        assert_eq!(min, errs);
    }

    #[test]
    fn display_round_trip() {
        for phi in enumerate_disjunctions(3).unwrap() {
            assert_eq!(Disjunction::parse(3, &phi.to_string()).unwrap(), phi);
        }
        assert!(Disjunction::parse(2, "x3").is_err());
        assert!(Disjunction::parse(2, "y1").is_err());
    }

    #[test]
    fn stream_text_format() {
        let s = LabeledStream::parse("1 0 1\n0 0 0\n\n# comment\n1 1 1\n").unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.rounds.len(), 3);
        assert_eq!(s.rounds[0], (vec![true, false], true));
        assert_eq!(LabeledStream::parse(&s.to_text()).unwrap().rounds, s.rounds);
        assert!(LabeledStream::parse("1 0 1\n0 1\n").is_err());
        assert!(LabeledStream::parse("1 2 1\n").is_err());
        assert!(LabeledStream::iid_noisy(&Disjunction::empty(), &[0.5], 0.5, 3, 0).is_err());
    }
}
