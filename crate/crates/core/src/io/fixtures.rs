use sha2::{Digest, Sha256};

use super::grouped::{parse_grouped_csv, GroupedTable};
use crate::error::{DisparityError, Result};

/// A published grouped-rate table embedded in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub csv: &'static str,
    /// SHA-256 of `csv`, recorded when the table was transcribed.
    pub sha256: &'static str,
}

impl Fixture {
    pub fn table(&self) -> Result<GroupedTable> {
        parse_grouped_csv(self.csv.as_bytes())
    }

    pub fn checksum_matches(&self) -> bool {
        sha256_hex(self.csv.as_bytes()) == self.sha256
    }
}

/// Three hypothetical populations (`hypothetical-*`), childhood obesity by family
/// income (`nhanes-*`, with standard errors) and cervical cancer incidence by
/// county poverty quintile (`seer-*`, with standard errors). Groups run from
/// lowest to highest SES.
pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "hypothetical-pop1",
        description: "Hypothetical population 1: percent in fair or poor health by income level",
        csv: include_str!("../../fixtures/hypothetical-pop1.csv"),
        sha256: "1fa40e1c9b182e7770dde49c05e46153d319b763e83af0151f1e6bd29b8d656f",
    },
    Fixture {
        name: "hypothetical-pop2",
        description: "Hypothetical population 2: percent in fair or poor health by income level",
        csv: include_str!("../../fixtures/hypothetical-pop2.csv"),
        sha256: "8be31aed88f4ecc561a80b689c2a179013759f45184d8286049de44d19310640",
    },
    Fixture {
        name: "hypothetical-pop3",
        description: "Hypothetical population 3: percent in fair or poor health by income level",
        csv: include_str!("../../fixtures/hypothetical-pop3.csv"),
        sha256: "860ae5c65157d35da1d22d77231d7470cf725796ae2bbf14b7e05a9370035149",
    },
    Fixture {
        name: "nhanes-2001-2004",
        description: "Childhood obesity prevalence (%) by family income, NHANES 2001-2004",
        csv: include_str!("../../fixtures/nhanes-2001-2004.csv"),
        sha256: "eb98d3c8802da3385e8815a74b99b43005a3fc549786c98246821dfd17c85e0c",
    },
    Fixture {
        name: "nhanes-2005-2008",
        description: "Childhood obesity prevalence (%) by family income, NHANES 2005-2008",
        csv: include_str!("../../fixtures/nhanes-2005-2008.csv"),
        sha256: "9a26ff105e98dcae4436d609e19f9b02ba6bd92e8ab02e96bf459e37f6f4ec92",
    },
    Fixture {
        name: "nhanes-2009-2010",
        description: "Childhood obesity prevalence (%) by family income, NHANES 2009-2010",
        csv: include_str!("../../fixtures/nhanes-2009-2010.csv"),
        sha256: "792c1767e22ea3e72352eb07f8dea169dd964fcaedd82da21ce0830adf588457",
    },
    Fixture {
        name: "seer-2006",
        description: "Age-adjusted invasive cervical cancer incidence per 100,000 by county poverty quintile, SEER 2006",
        csv: include_str!("../../fixtures/seer-2006.csv"),
        sha256: "1fd2122594e6e35c60feba23ba6fb9b71f0898b8760f9f711f1a6acbc9640e8e",
    },
    Fixture {
        name: "seer-2007",
        description: "Age-adjusted invasive cervical cancer incidence per 100,000 by county poverty quintile, SEER 2007",
        csv: include_str!("../../fixtures/seer-2007.csv"),
        sha256: "39906b3a95a5d37450b6e57b67da8abf5135782cd249671c74b3ef3f3d7073a0",
    },
    Fixture {
        name: "seer-2008",
        description: "Age-adjusted invasive cervical cancer incidence per 100,000 by county poverty quintile, SEER 2008",
        csv: include_str!("../../fixtures/seer-2008.csv"),
        sha256: "edc960a56e6ab04aa5fd710c6d84578dd259861fbbfffa15f8f351fed9bd38e7",
    },
    Fixture {
        name: "seer-2009",
        description: "Age-adjusted invasive cervical cancer incidence per 100,000 by county poverty quintile, SEER 2009",
        csv: include_str!("../../fixtures/seer-2009.csv"),
        sha256: "bb31d61727f78849a63181cb2accd2cc29f08666ce56cc2d0c3c45e39006b170",
    },
    Fixture {
        name: "seer-2010",
        description: "Age-adjusted invasive cervical cancer incidence per 100,000 by county poverty quintile, SEER 2010",
        csv: include_str!("../../fixtures/seer-2010.csv"),
        sha256: "f8170b54242b9c8ea17203d95e31f26d9bd3beff9212929ef3028157376fdb28",
    },
];

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn fixture(name: &str) -> Result<&'static Fixture> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| DisparityError::InvalidInput(format!("unknown fixture '{name}'")))
}

/// Fixtures whose name starts with `prefix`, e.g. `seer`.
pub fn fixture_set(prefix: &str) -> Vec<&'static Fixture> {
    FIXTURES.iter().filter(|f| f.name.starts_with(prefix)).collect()
}

/// Parses a fixture after checking its checksum.
pub fn load_fixture(name: &str) -> Result<GroupedTable> {
    let f = fixture(name)?;
    if !f.checksum_matches() {
        return Err(DisparityError::InvalidInput(format!(
            "fixture '{name}' does not match its recorded checksum"
        )));
    }
    f.table()
}
