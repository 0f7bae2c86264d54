//! Function sources and set syntax.

use std::path::Path;

use modkit::constructions::adversarial::{adversarial, noisy_linear, random_linear, AdversarialInstance};
use modkit::constructions::basic::{four_item_worstcase, pawlik, symmetric_example};
use modkit::constructions::km::{km20, km70, KmFunction, WideSet};
use modkit::{Error, ItemSet, LargeSet, Oracle, SetFunction};

pub const BUILTINS: &str = "pawlik:K, symm:N:EPS, four, km20, km70, linear:N:SEED, noisy:N:DELTA:SEED, adversarial:N:SEED";

pub enum Source {
    Function(SetFunction),
    Km(KmFunction),
    Adversarial(Box<AdversarialInstance>),
}

impl Source {
    pub fn n(&self) -> usize {
        match self {
            Source::Function(f) => f.n(),
            Source::Km(k) => k_universe_n(k),
            Source::Adversarial(a) => a.spec.n,
        }
    }

    /// A tabulable or closed-form function; km20 is tabulated on demand.
    pub fn function(&self) -> Result<SetFunction, Error> {
        match self {
            Source::Function(f) => Ok(f.clone()),
            Source::Km(k) if self.n() <= modkit::function::MAX_TABLE_ITEMS => k.to_set_function(),
            Source::Km(_) | Source::Adversarial(_) => Err(Error::Unsupported(
                "this command needs a function on at most 24 items; km70 and adversarial are rule-evaluated only"
                    .into(),
            )),
        }
    }

    pub fn oracle(&self) -> Result<&dyn Oracle, Error> {
        match self {
            Source::Function(f) => Ok(f),
            Source::Adversarial(a) => Ok(a.as_ref()),
            Source::Km(_) => Err(Error::Unsupported("km functions are not exposed as learner oracles".into())),
        }
    }
}

fn k_universe_n(k: &KmFunction) -> usize {
    use modkit::constructions::km::KmOracle;
    k.universe().n()
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, Error> {
    s.parse().map_err(|_| Error::Domain(format!("cannot parse {what} from {s:?}")))
}

/// A JSON file path, or one of [`BUILTINS`].
pub fn load_source(spec: &str) -> Result<Source, Error> {
    if Path::new(spec).exists() {
        return Ok(Source::Function(modkit::io::load(Path::new(spec))?));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let arg = |i: usize| -> Result<&str, Error> {
        parts
            .get(i)
            .copied()
            .ok_or_else(|| Error::Domain(format!("builtin {spec:?} is missing argument {i}; builtins: {BUILTINS}")))
    };
    Ok(match parts[0] {
        "pawlik" => Source::Function(pawlik(num(arg(1)?, "k")?)?),
        "symm" => Source::Function(symmetric_example(num(arg(1)?, "n")?, num(arg(2)?, "eps")?)?),
        "four" => Source::Function(four_item_worstcase()),
        "km20" => Source::Km(km20()),
        "km70" => Source::Km(km70()),
        "linear" => Source::Function(SetFunction::linear(random_linear(num(arg(1)?, "n")?, num(arg(2)?, "seed")?))?),
        "noisy" => {
            let n = num(arg(1)?, "n")?;
            let seed = num(arg(3)?, "seed")?;
            Source::Function(noisy_linear(random_linear(n, seed), num(arg(2)?, "delta")?, seed)?)
        }
        "adversarial" => {
            let n: usize = num(arg(1)?, "n")?;
            let delta = ((n as f64).ln() / n as f64).sqrt();
            Source::Adversarial(Box::new(adversarial(n, delta, num(arg(2)?, "seed")?)?))
        }
        _ => {
            return Err(Error::Domain(format!(
                "{spec:?} is neither a file nor a builtin ({BUILTINS})"
            )))
        }
    })
}

/// `0x…`, `0b…`, or a 1-based item list such as `1,3,5` (`{}` is empty).
pub fn parse_items(text: &str, n: usize) -> Result<Vec<usize>, Error> {
    let t = text.trim();
    let bits = |digits: &str, radix: u32| -> Result<Vec<usize>, Error> {
        let digits = digits.replace('_', "");
        let v = u128::from_str_radix(&digits, radix).map_err(|_| Error::Domain(format!("bad mask {text:?}")))?;
        Ok((0..128).filter(|&i| v >> i & 1 == 1).collect())
    };
    let items = if let Some(h) = t.strip_prefix("0x") {
        bits(h, 16)?
    } else if let Some(b) = t.strip_prefix("0b") {
        bits(b, 2)?
    } else {
        let inner = t.trim_start_matches('{').trim_end_matches('}');
        let mut v = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = num(part, "item")?;
            if i == 0 {
                return Err(Error::Domain("items are numbered from 1".into()));
            }
            v.push(i - 1);
        }
        v
    };
    if let Some(&bad) = items.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("item {} outside a universe of {n}", bad + 1)));
    }
    Ok(items)
}

pub fn item_set(text: &str, n: usize) -> Result<ItemSet, Error> {
    ItemSet::from_items(n, parse_items(text, n)?)
}

pub fn wide_set(text: &str, n: usize) -> Result<WideSet, Error> {
    WideSet::from_items(n, parse_items(text, n)?)
}

pub fn large_set(text: &str, n: usize) -> Result<LargeSet, Error> {
    Ok(LargeSet::from_items(n, parse_items(text, n)?))
}
