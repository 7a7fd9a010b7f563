//! Seeded synthetic stand-ins for proprietary interfirm data.

mod coupled;
mod shareholding;

pub use coupled::{gen_coupled, ConvertedPair, CoupledData, CoupledGenParams, GroundTruth};
pub use shareholding::{gen_country_suite, gen_shareholding, write_network_csv, ShareGenParams};

use crate::graph::Country;

/// The twenty largest economies by GDP, as ISO-3166 alpha-2 codes.
pub const TOP20_COUNTRIES: [&str; 20] = [
    "US", "CN", "JP", "DE", "GB", "IN", "FR", "IT", "CA", "KR", "RU", "BR", "AU", "ES", "MX", "ID", "NL", "ZA",
    "TR", "CH",
];

/// First `n` country codes: the top-20 list, then generated `Xx` codes.
pub fn country_codes(n: usize) -> Vec<Country> {
    let mut out: Vec<Country> = TOP20_COUNTRIES
        .iter()
        .take(n)
        .map(|c| Country::parse(c).expect("static code"))
        .collect();
    let mut i = 0u8;
    while out.len() < n {
        let code = [b'X', b'A' + (i % 26)];
        let extra = if i < 26 { code } else { [b'Q' + (i / 26 - 1) % 4, b'A' + i % 26] };
        let c = Country::parse(std::str::from_utf8(&extra).unwrap()).unwrap();
        if !out.contains(&c) {
            out.push(c);
        }
        i = i.checked_add(1).expect("at most a few hundred synthetic countries");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn country_codes_are_distinct() {
        let c = country_codes(60);
        let mut d = c.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), 60);
        assert_eq!(c[0].as_str(), "US");
    }
}
