//! The online training pool: capped FIFO storage, recent-first batch
//! sampling, and per-step eligibility accounting.

use std::collections::VecDeque;
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::dsl::{self, Expr};

/// Default pool capacity.
pub const DEFAULT_CAPACITY: usize = 16_384;

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: u64,
    pub program_text: String,
    /// Parsed program; absent only for text that does not parse.
    pub expr: Option<Expr>,
    pub input: (i64, i64),
    /// Executor output `o*`, present iff `exec`.
    pub output: Option<String>,
    /// Output claimed by the proposer.
    pub claimed: Option<String>,
    pub exec: bool,
    /// Step at which the task was admitted (0 for the seed pool).
    pub step: u64,
}

impl Task {
    /// Reference answer used for grounded solver rewards: the executor
    /// output when there is one, otherwise the proposer's claim.
    pub fn gold(&self) -> Option<&str> {
        self.output.as_deref().or(self.claimed.as_deref())
    }

    pub fn depth(&self) -> Option<usize> {
        self.expr.as_ref().map(Expr::depth)
    }
}

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("pool is empty")]
    EmptyPool,
    #[error("task id {id} is not greater than the last inserted id {last}")]
    NonMonotoneId { id: u64, last: u64 },
    #[error("pool capacity must be positive")]
    ZeroCapacity,
    #[error("snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Admission counts for the step in progress.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub proposed: usize,
    pub admitted: usize,
}

/// Fraction of the step's proposals that entered the pool; `None` when
/// nothing was proposed.
pub fn eligibility(stats: &StepStats) -> Option<f64> {
    (stats.proposed > 0).then(|| stats.admitted as f64 / stats.proposed as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    tasks: VecDeque<Task>,
    capacity: usize,
    last_id: Option<u64>,
    stats: StepStats,
    recent: Vec<u64>,
}

impl Pool {
    pub fn new(capacity: usize) -> Result<Self, PoolError> {
        if capacity == 0 {
            return Err(PoolError::ZeroCapacity);
        }
        Ok(Pool {
            tasks: VecDeque::new(),
            capacity,
            last_id: None,
            stats: StepStats::default(),
            recent: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.tasks.iter()
    }

    pub fn next_id(&self) -> u64 {
        self.last_id.map_or(0, |id| id + 1)
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Starts a new step: clears the admission counts and the set of tasks
    /// considered recent.
    pub fn begin_step(&mut self) {
        self.stats = StepStats::default();
        self.recent.clear();
    }

    pub fn record_proposal(&mut self) {
        self.stats.proposed += 1;
    }

    /// Appends `task`, evicting the oldest task if capacity is exceeded.
    /// Returns the evicted id.
    pub fn insert(&mut self, task: Task) -> Result<Option<u64>, PoolError> {
        if let Some(last) = self.last_id {
            if task.id <= last {
                return Err(PoolError::NonMonotoneId { id: task.id, last });
            }
        }
        self.last_id = Some(task.id);
        self.stats.admitted += 1;
        self.recent.push(task.id);
        self.tasks.push_back(task);
        if self.tasks.len() > self.capacity {
            Ok(self.tasks.pop_front().map(|t| t.id))
        } else {
            Ok(None)
        }
    }

    fn position(&self, id: u64) -> Option<usize> {
        // ids are sorted, so binary search works
        let (a, b) = self.tasks.as_slices();
        match a.binary_search_by_key(&id, |t| t.id) {
            Ok(i) => Some(i),
            Err(_) => b.binary_search_by_key(&id, |t| t.id).ok().map(|i| a.len() + i),
        }
    }

    /// Draws a solver batch of `b` tasks: every task admitted this step (up
    /// to `b`), then a uniform fill without replacement from the rest of the
    /// pool. A pool smaller than `b` is sampled with replacement.
    pub fn sample_batch<R: Rng + ?Sized>(&self, b: usize, rng: &mut R) -> Result<Vec<&Task>, PoolError> {
        if self.tasks.is_empty() {
            return Err(PoolError::EmptyPool);
        }
        let mut chosen: Vec<usize> = self
            .recent
            .iter()
            .filter_map(|&id| self.position(id))
            .take(b)
            .collect();
        let need = b - chosen.len();
        if self.tasks.len() < b {
            for _ in 0..need {
                chosen.push(rng.gen_range(0..self.tasks.len()));
            }
        } else if need > 0 {
            let mut taken = vec![false; self.tasks.len()];
            for &i in &chosen {
                taken[i] = true;
            }
            let rest: Vec<usize> = (0..self.tasks.len()).filter(|&i| !taken[i]).collect();
            chosen.extend(index::sample(rng, rest.len(), need).into_iter().map(|k| rest[k]));
        }
        Ok(chosen.into_iter().map(|i| &self.tasks[i]).collect())
    }

    /// Writes one tab-separated record per task:
    /// `id, program_text, x, y, o* or -, õ or -, exec, step`.
    pub fn write_snapshot(&self, path: &Path) -> Result<(), PoolError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for t in &self.tasks {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.id,
                t.program_text,
                t.input.0,
                t.input.1,
                t.output.as_deref().unwrap_or("-"),
                t.claimed.as_deref().unwrap_or("-"),
                u8::from(t.exec),
                t.step
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path, capacity: usize) -> Result<Pool, PoolError> {
        let mut pool = Pool::new(capacity)?;
        let reader = io::BufReader::new(fs::File::open(path)?);
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let task = parse_record(&line).map_err(|reason| PoolError::Snapshot {
                line: n + 1,
                reason,
            })?;
            pool.insert(task)?;
        }
        pool.begin_step();
        Ok(pool)
    }
}

fn parse_record(line: &str) -> Result<Task, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 8 {
        return Err(format!("expected 8 fields, found {}", fields.len()));
    }
    let num = |i: usize| -> Result<i64, String> {
        fields[i]
            .parse::<i64>()
            .map_err(|e| format!("field {}: {e}", i + 1))
    };
    let opt = |s: &str| (s != "-").then(|| s.to_string());
    let exec = match fields[6] {
        "1" => true,
        "0" => false,
        other => return Err(format!("bad exec flag `{other}`")),
    };
    let program_text = fields[1].to_string();
    Ok(Task {
        id: fields[0].parse().map_err(|e| format!("id: {e}"))?,
        expr: dsl::parse(&program_text).ok(),
        program_text,
        input: (num(2)?, num(3)?),
        output: opt(fields[4]),
        claimed: opt(fields[5]),
        exec,
        step: fields[7].parse().map_err(|e| format!("step: {e}"))?,
    })
}
