//! Doc-test harness for the guide. Each chapter is attached to an empty module
//! so `cargo test -p bergman-book` compiles and runs its code blocks.

macro_rules! chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub mod $name {}
        )*
    };
}

chapters! {
    introduction => "introduction.md",
    geometry => "geometry.md",
    metrics => "metrics.md",
    sections => "sections.md",
    fubini_study => "fubini-study.md",
    zeros => "zeros.md",
    distance => "distance.md",
    experiments => "experiments.md",
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_chapter_is_included() {
        let summary = include_str!("../../../book/src/SUMMARY.md");
        let harness = include_str!("lib.rs");
        for line in summary.lines().filter(|l| l.contains(".md)")) {
            let file = &line[line.find('(').unwrap() + 1..line.find(')').unwrap()];
            assert!(harness.contains(&format!("\"{file}\"")), "{file} is not in the harness");
        }
    }
}
