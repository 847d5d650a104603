//! Shared test fixture: a synthetic file in the credit-data layout whose
//! (label, group) joint counts match the canonical file's documented
//! distribution for all three protected attributes simultaneously. Among
//! the 700 good risks 201 are female, 667 foreign workers, and 110 below
//! age 25; among the 300 bad risks 109, 296, and 80. Remaining attributes
//! vary pseudo-randomly (deterministically) with outcome-dependent skews so
//! models have signal to learn and folds genuinely differ.

/// Deterministic per-(row, field) noise.
fn noise(i: usize, salt: u64) -> u64 {
    let mut z = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pick<'a>(options: &[&'a str], i: usize, salt: u64) -> &'a str {
    options[(noise(i, salt) % options.len() as u64) as usize]
}

fn line(i: usize, good: bool, female: bool, foreign: bool, young: bool) -> String {
    let r = i + if good { 0 } else { 700 }; // unique row id for noise
    let checking = if good {
        pick(&["A12", "A13", "A14", "A14"], r, 1)
    } else {
        pick(&["A11", "A11", "A12", "A14"], r, 1)
    };
    let duration = if good {
        6 + noise(r, 2) % 30
    } else {
        12 + noise(r, 2) % 48
    };
    let history = pick(&["A30", "A31", "A32", "A32", "A33", "A34"], r, 3);
    let purpose = pick(&["A40", "A41", "A42", "A43", "A45", "A46", "A49", "A410"], r, 4);
    let amount = if good {
        500 + noise(r, 5) % 7500
    } else {
        800 + noise(r, 5) % 12000
    };
    let savings = if good {
        pick(&["A61", "A62", "A63", "A64", "A65"], r, 6)
    } else {
        pick(&["A61", "A61", "A62", "A65"], r, 6)
    };
    let employment = pick(&["A71", "A72", "A73", "A74", "A75"], r, 7);
    let rate = 1 + noise(r, 8) % 4;
    let personal = if female {
        "A92"
    } else {
        pick(&["A91", "A93", "A93", "A94"], r, 9)
    };
    let debtors = pick(&["A101", "A101", "A102", "A103"], r, 10);
    let residence = 1 + noise(r, 11) % 4;
    let property = pick(&["A121", "A122", "A123", "A124"], r, 12);
    let age = if young {
        19 + noise(r, 13) % 6
    } else {
        25 + noise(r, 13) % 45
    };
    let plans = pick(&["A141", "A142", "A143", "A143"], r, 14);
    let housing = pick(&["A151", "A152", "A152", "A153"], r, 15);
    let credits = 1 + noise(r, 16) % 3;
    let job = pick(&["A171", "A172", "A173", "A173", "A174"], r, 17);
    let dependents = 1 + noise(r, 18) % 2;
    let phone = pick(&["A191", "A191", "A192"], r, 19);
    let worker = if foreign { "A201" } else { "A202" };
    let risk = if good { 1 } else { 2 };
    format!(
        "{checking} {duration} {history} {purpose} {amount} {savings} {employment} {rate} \
         {personal} {debtors} {residence} {property} {age} {plans} {housing} {credits} \
         {job} {dependents} {phone} {worker} {risk}"
    )
}

pub fn german_fixture_text() -> String {
    let mut lines = Vec::with_capacity(1000);
    for i in 0..700 {
        lines.push(line(i, true, i < 201, i < 667, i < 110));
    }
    for i in 0..300 {
        lines.push(line(i, false, i < 109, i < 296, i < 80));
    }
    lines.join("\n") + "\n"
}
