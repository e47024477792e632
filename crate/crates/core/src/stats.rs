/// Work counters accumulated during an analysis.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Stats {
    pub sat_checks: u64,
    pub entailment_checks: u64,
    pub fm_eliminations: u64,
    pub candidates_tried: u64,
}

impl Stats {
    pub fn merge(&mut self, other: &Stats) {
        self.sat_checks += other.sat_checks;
        self.entailment_checks += other.entailment_checks;
        self.fm_eliminations += other.fm_eliminations;
        self.candidates_tried += other.candidates_tried;
    }
}
