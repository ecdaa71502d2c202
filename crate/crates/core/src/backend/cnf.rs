use std::fmt::Write;

use super::sat::{Budget, Lit, SatResult, SatSolver, Var};

/// Clause list over variables `1..=num_vars` (DIMACS numbering).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<i64>>,
    /// Set when an empty clause was added; the formula is then unsatisfiable.
    trivially_unsat: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CdclOutcome {
    /// Assignment for variables `1..=num_vars`, index 0 unused.
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed DIMACS input: {0}")]
pub struct DimacsError(String);

impl CnfFormula {
    pub fn new(num_vars: u32) -> Self {
        CnfFormula {
            num_vars,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn is_trivially_unsat(&self) -> bool {
        self.trivially_unsat
    }

    pub fn new_var(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars
    }

    /// Adds a clause of non-zero DIMACS literals. An empty clause is not
    /// stored; it marks the formula unsatisfiable instead.
    pub fn add_clause(&mut self, lits: &[i64]) {
        assert!(lits
            .iter()
            .all(|&l| l != 0 && l.unsigned_abs() <= self.num_vars as u64));
        if lits.is_empty() {
            self.trivially_unsat = true;
        } else {
            self.clauses.push(lits.to_vec());
        }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let extra = usize::from(self.trivially_unsat);
        let _ = writeln!(
            out,
            "p cnf {} {}",
            self.num_vars,
            self.clauses.len() + extra
        );
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        if self.trivially_unsat {
            out.push_str("0\n");
        }
        out
    }

    pub fn parse_dimacs(text: &str) -> Result<Self, DimacsError> {
        let mut f: Option<CnfFormula> = None;
        let mut current = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let nums: Vec<u32> = rest
                    .split_whitespace()
                    .map(|n| {
                        n.parse()
                            .map_err(|_| DimacsError(format!("bad header `{line}`")))
                    })
                    .collect::<Result<_, _>>()?;
                let [vars, _] = nums.as_slice() else {
                    return Err(DimacsError(format!("bad header `{line}`")));
                };
                f = Some(CnfFormula::new(*vars));
                continue;
            }
            let cnf = f
                .as_mut()
                .ok_or_else(|| DimacsError("clause before header".into()))?;
            for tok in line.split_whitespace() {
                let l: i64 = tok
                    .parse()
                    .map_err(|_| DimacsError(format!("bad literal `{tok}`")))?;
                if l == 0 {
                    if current
                        .iter()
                        .any(|&x: &i64| x.unsigned_abs() > cnf.num_vars as u64)
                    {
                        return Err(DimacsError("literal exceeds declared variables".into()));
                    }
                    cnf.add_clause(&current);
                    current.clear();
                } else {
                    current.push(l);
                }
            }
        }
        f.ok_or_else(|| DimacsError("missing header".into()))
    }

    /// True when `assignment` (indexed from 1) satisfies every clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        !self.trivially_unsat
            && self.clauses.iter().all(|c| {
                c.iter()
                    .any(|&l| assignment[l.unsigned_abs() as usize] == (l > 0))
            })
    }
}

/// Decides `f` with the CDCL solver.
pub fn cdcl_solve(f: &CnfFormula, budget: Budget) -> CdclOutcome {
    solve_with(SatSolver::new(), f, budget)
}

/// Decides `f` with learning disabled (chronological DPLL).
pub fn dpll_solve(f: &CnfFormula, budget: Budget) -> CdclOutcome {
    solve_with(SatSolver::without_learning(), f, budget)
}

fn solve_with(mut s: SatSolver, f: &CnfFormula, budget: Budget) -> CdclOutcome {
    if f.trivially_unsat {
        return CdclOutcome::Unsat;
    }
    let vars: Vec<Var> = (0..f.num_vars).map(|_| s.new_var()).collect();
    for c in &f.clauses {
        let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
        if !s.add_clause(&lits) {
            return CdclOutcome::Unsat;
        }
    }
    match s.solve(budget) {
        SatResult::Sat => {
            let mut a = vec![false; f.num_vars as usize + 1];
            for v in vars {
                a[v.0 as usize + 1] = s.model_value(v);
            }
            CdclOutcome::Sat(a)
        }
        SatResult::Unsat => CdclOutcome::Unsat,
        SatResult::Unknown => CdclOutcome::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip() {
        let mut f = CnfFormula::new(3);
        f.add_clause(&[1, -2]);
        f.add_clause(&[2, 3, -1]);
        let text = f.to_dimacs();
        assert!(text.starts_with("p cnf 3 2\n"));
        assert_eq!(CnfFormula::parse_dimacs(&text).unwrap(), f);
    }

    #[test]
    fn empty_clause_is_immediate_unsat() {
        let mut f = CnfFormula::new(1);
        f.add_clause(&[]);
        assert!(f.clauses().is_empty());
        assert_eq!(cdcl_solve(&f, Budget::default()), CdclOutcome::Unsat);
        assert!(CnfFormula::parse_dimacs(&f.to_dimacs())
            .unwrap()
            .is_trivially_unsat());
    }

    #[test]
    fn x_and_not_x() {
        let mut f = CnfFormula::new(1);
        f.add_clause(&[1]);
        f.add_clause(&[-1]);
        assert_eq!(cdcl_solve(&f, Budget::default()), CdclOutcome::Unsat);
        assert_eq!(dpll_solve(&f, Budget::default()), CdclOutcome::Unsat);
    }

    #[test]
    fn malformed_dimacs() {
        assert!(CnfFormula::parse_dimacs("1 2 0").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 1 1\n2 0").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf x 1").is_err());
    }
}
