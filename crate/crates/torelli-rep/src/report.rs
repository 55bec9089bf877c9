//! Machine-readable verification reports.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub case: String,
    pub g: usize,
    pub status: Status,
    pub expected: String,
    pub actual: String,
    pub first_diff: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report {
    pub fn new(case: &str, g: usize) -> Report {
        Report { case: case.to_string(), g, status: Status::Fail, expected: String::new(), actual: String::new(), first_diff: None, note: None }
    }

    pub fn fail(mut self, msg: impl Into<String>) -> Report {
        self.status = Status::Fail;
        self.first_diff = Some(msg.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn line(&self) -> String {
        let mut s = format!("{} {} g={}", self.status, self.case, self.g);
        if let Some(d) = &self.first_diff {
            if self.status != Status::Pass {
                s.push_str(&format!(": {d}"));
            }
        }
        if let Some(n) = &self.note {
            s.push_str(&format!(" ({n})"));
        }
        s
    }
}
