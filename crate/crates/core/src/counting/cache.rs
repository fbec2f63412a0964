//! On-disk cache for [`InjectionTable`].
//!
//! Text format, one record per line:
//!
//! ```text
//! stallings-injection-table v1
//! n_max 5000 dense 2048 stride 512
//! <k> <limbs> <top, 32 hex digits> <power-of-two flag> [<I_k in hex>]
//! ...
//! end
//! ```
//!
//! There is one line for every `k` in `0..=n_max`. The value column is present
//! exactly for the entries the table stores (the dense prefix and the seed
//! pairs). Values are hexadecimal because decimal conversion of entries with
//! millions of bits dominates load time.

use std::io::{BufRead, Write};

use num_bigint::BigUint;

use super::{Head, InjectionTable, DENSE_LEN, STRIDE};
use crate::error::{Error, Result};

pub const CACHE_VERSION: u32 = 1;
const MAGIC: &str = "stallings-injection-table";

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Data(format!("corrupt table cache: {}", msg.into()))
}

fn stored_indices(n_max: usize) -> impl Iterator<Item = (usize, Slot)> {
    let dense = (0..=n_max.min(DENSE_LEN - 1)).map(|k| (k, Slot::Dense));
    let seeds = (DENSE_LEN..=n_max)
        .step_by(STRIDE)
        .enumerate()
        .flat_map(|(b, c)| [(c - 2, Slot::SeedOlder(b)), (c - 1, Slot::SeedNewer(b))]);
    dense.chain(seeds)
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Dense,
    SeedOlder(usize),
    SeedNewer(usize),
}

pub fn write_cache<W: Write>(table: &InjectionTable, mut out: W) -> std::io::Result<()> {
    let n_max = table.n_max();
    writeln!(out, "{MAGIC} v{CACHE_VERSION}")?;
    writeln!(out, "n_max {n_max} dense {DENSE_LEN} stride {STRIDE}")?;

    let mut values: Vec<Option<&BigUint>> = vec![None; n_max + 1];
    for (k, slot) in stored_indices(n_max) {
        values[k] = Some(match slot {
            Slot::Dense => &table.dense()[k],
            Slot::SeedOlder(b) => &table.seeds()[b].0,
            Slot::SeedNewer(b) => &table.seeds()[b].1,
        });
    }
    for (k, head) in table.heads().iter().enumerate() {
        write!(
            out,
            "{k} {} {:032x} {}",
            head.limbs,
            head.top,
            u8::from(head.power_of_two)
        )?;
        if let Some(v) = values[k] {
            write!(out, " {v:x}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "end")?;
    out.flush()
}

pub fn read_cache<R: BufRead>(input: R) -> Result<InjectionTable> {
    let mut lines = input.lines();
    let mut next_line = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| corrupt("unexpected end of file"))?
            .map_err(|e| corrupt(e.to_string()))
    };

    let magic = next_line()?;
    if magic != format!("{MAGIC} v{CACHE_VERSION}") {
        return Err(corrupt(format!("unsupported header {magic:?}")));
    }
    let params = next_line()?;
    let fields: Vec<&str> = params.split_whitespace().collect();
    let n_max = match fields.as_slice() {
        ["n_max", n, "dense", d, "stride", s]
            if d.parse() == Ok(DENSE_LEN) && s.parse() == Ok(STRIDE) =>
        {
            n.parse::<usize>().map_err(|_| corrupt("bad n_max"))?
        }
        _ => return Err(corrupt(format!("bad parameter line {params:?}"))),
    };

    let mut heads = Vec::with_capacity(n_max + 1);
    let mut values: Vec<Option<BigUint>> = vec![None; n_max + 1];
    for (k, value) in values.iter_mut().enumerate() {
        let line = next_line()?;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() < 4 || parts.len() > 5 || parts[0].parse() != Ok(k) {
            return Err(corrupt(format!("bad record for k = {k}")));
        }
        let head = Head {
            limbs: parts[1].parse().map_err(|_| corrupt("bad limb count"))?,
            top: u128::from_str_radix(parts[2], 16).map_err(|_| corrupt("bad head"))?,
            power_of_two: match parts[3] {
                "0" => false,
                "1" => true,
                _ => return Err(corrupt("bad power-of-two flag")),
            },
        };
        if let Some(hex) = parts.get(4) {
            let v = BigUint::parse_bytes(hex.as_bytes(), 16)
                .ok_or_else(|| corrupt(format!("bad value for k = {k}")))?;
            if Head::of(&v) != head {
                return Err(corrupt(format!("head mismatch at k = {k}")));
            }
            *value = Some(v);
        }
        heads.push(head);
    }
    if next_line()? != "end" {
        return Err(corrupt("missing end marker"));
    }

    let mut dense = Vec::new();
    let mut seeds: Vec<(Option<BigUint>, Option<BigUint>)> = Vec::new();
    let mut expected = vec![false; n_max + 1];
    for (k, slot) in stored_indices(n_max) {
        expected[k] = true;
        // the first seed pair overlaps the end of the dense prefix
        let v = values[k]
            .clone()
            .ok_or_else(|| corrupt(format!("missing stored value for k = {k}")))?;
        match slot {
            Slot::Dense => dense.push(v),
            Slot::SeedOlder(_) => seeds.push((Some(v), None)),
            Slot::SeedNewer(b) => seeds[b].1 = Some(v),
        }
    }
    if values
        .iter()
        .zip(&expected)
        .any(|(v, &e)| v.is_some() && !e)
    {
        return Err(corrupt("value present for an index that is not stored"));
    }
    let seeds: Vec<(BigUint, BigUint)> = seeds
        .into_iter()
        .map(|(a, b)| (a.expect("older seed"), b.expect("newer seed")))
        .collect();

    // the dense prefix must satisfy the recurrence; each seed pair must
    // reproduce the recorded head of the first entry of its block
    for k in 2..dense.len() {
        if dense[k] != super::step(k as u64, &dense[k - 2], &dense[k - 1]) {
            return Err(corrupt(format!("recurrence fails at k = {k}")));
        }
    }
    if dense.first().is_some_and(|v| *v != BigUint::from(1u32))
        || dense.get(1).is_some_and(|v| *v != BigUint::from(2u32))
    {
        return Err(corrupt("wrong initial values"));
    }
    for (b, (older, newer)) in seeds.iter().enumerate() {
        let c = DENSE_LEN + b * STRIDE;
        if Head::of(&super::step(c as u64, older, newer)) != heads[c] {
            return Err(corrupt(format!("seed pair {b} is inconsistent")));
        }
    }

    Ok(InjectionTable::from_parts(n_max, dense, seeds, heads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(n_max: usize) {
        let table = InjectionTable::build(n_max);
        let mut buf = Vec::new();
        write_cache(&table, &mut buf).unwrap();
        let back = read_cache(buf.as_slice()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn round_trips() {
        round_trip(0);
        round_trip(1);
        round_trip(30);
        round_trip(DENSE_LEN + STRIDE + 3);
    }

    #[test]
    fn rejects_corruption() {
        let table = InjectionTable::build(40);
        let mut buf = Vec::new();
        write_cache(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let bad_header = text.replacen("v1", "v9", 1);
        assert!(read_cache(bad_header.as_bytes()).is_err());

        // I_4 = 209 = 0xd1
        let bad_value = text.replacen(" d1\n", " d3\n", 1);
        assert_ne!(bad_value, text);
        assert!(read_cache(bad_value.as_bytes()).is_err());

        let truncated = &text[..text.len() / 2];
        assert!(read_cache(truncated.as_bytes()).is_err());
    }
}
