/// Match history of one ground-truth track: the times (seconds) of the frames
/// where it is annotated and whether it was matched in each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timeline {
    pub times: Vec<f64>,
    pub matched: Vec<bool>,
}

impl Timeline {
    pub fn push(&mut self, time: f64, matched: bool) {
        self.times.push(time);
        self.matched.push(matched);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn coverage(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.matched.iter().filter(|&&m| m).count() as f64 / self.len() as f64
    }

    /// (initialization duration, longest gap duration) in seconds.
    ///
    /// A missed frame counts from its own time to the next frame's time; the
    /// last frame of a track spans no time. A track that is never matched
    /// gets its full duration for both.
    pub fn durations(&self) -> (f64, f64) {
        let Some(first) = self.matched.iter().position(|&m| m) else {
            let d = self.duration();
            return (d, d);
        };
        let tid = self.times[first] - self.times[0];
        let last = self.len() - 1;
        let mut lgd: f64 = 0.0;
        let mut run_start = None;
        for (i, &m) in self.matched.iter().enumerate() {
            match (m, run_start) {
                (false, None) => run_start = Some(i),
                (true, Some(s)) => {
                    lgd = lgd.max(self.times[i] - self.times[s]);
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            lgd = lgd.max(self.times[last] - self.times[s]);
        }
        (tid, lgd)
    }
}

/// Mean TID and LGD over tracks; (0, 0) for an empty list.
pub fn tid_lgd(tracks: &[Timeline]) -> (f64, f64) {
    if tracks.is_empty() {
        return (0.0, 0.0);
    }
    let (tid, lgd) = tracks
        .iter()
        .map(Timeline::durations)
        .fold((0.0, 0.0), |acc, d| (acc.0 + d.0, acc.1 + d.1));
    let n = tracks.len() as f64;
    (tid / n, lgd / n)
}
