//! A debugging session driven by protocol messages.

use std::collections::BTreeSet;

use aspdbg_core::diagnosis::{Finding, SampleLimit, Session, SessionStatus};
use aspdbg_core::instrument::{assemble_gamma_with, default_background, validate_background};
use aspdbg_core::{
    ground, parse_atom, parse_program, parse_test_case, GroundMode, GroundOptions, Program, RuleId,
    TestCase,
};

use crate::protocol::{
    salvage_seq, AnswerInfo, Binding, FindingInfo, InstanceInfo, Payload, QueryInfo, RuleRef,
    SessionMessage, Status, PROTOCOL_VERSION,
};
use crate::source::Sources;
use crate::Error;

/// Everything needed to open a session.
#[derive(Clone, Debug)]
pub struct DebugInput {
    pub sources: Sources,
    pub test_name: String,
    pub test_text: String,
    /// `None` selects all facts.
    pub background: Option<BTreeSet<RuleId>>,
    pub sample_limit: SampleLimit,
    pub budget: usize,
}

impl DebugInput {
    pub fn new(sources: Sources, test_name: &str, test_text: &str) -> Self {
        DebugInput {
            sources,
            test_name: test_name.to_string(),
            test_text: test_text.to_string(),
            background: None,
            sample_limit: SampleLimit::default(),
            budget: aspdbg_core::ground::DEFAULT_GROUNDING_BUDGET,
        }
    }
}

pub struct Engine {
    sources: Sources,
    program: Program,
    test: TestCase,
    session: Session,
    report: Payload,
    seq: u64,
    done: bool,
}

impl Engine {
    /// Parses, instruments and grounds; fails with [`Error::TestPassed`]
    /// when there is nothing to debug.
    pub fn start(input: DebugInput) -> Result<Engine, Error> {
        let sources = input.sources;
        let program = parse_program(sources.text()).map_err(|e| sources.parse_error(&e))?;
        let test = parse_test_case(&input.test_text).map_err(|e| Error::Parse {
            location: crate::source::Location {
                file: input.test_name.clone(),
                line: e.line,
                column: e.column,
            },
            message: e.message(),
        })?;
        let background = match input.background {
            Some(ids) => {
                validate_background(&program, &ids).map_err(|e| Error::Input(e.to_string()))?;
                ids
            }
            None => default_background(&program),
        };
        let gamma = assemble_gamma_with(&program, &test, &background, input.budget)
            .map_err(|e| Error::Input(e.to_string()))?;
        let simplified = ground(
            &program,
            GroundOptions {
                mode: GroundMode::Simplify,
                budget: input.budget,
            },
        )
        .map_err(|e| Error::Input(e.to_string()))?;
        let warnings = simplified
            .warnings
            .iter()
            .map(|w| rule_ref(&program, &sources, w.rule_id))
            .collect();
        let report = Payload::GroundReport {
            atoms: gamma.ground.atoms.len(),
            program_rules: gamma.base_grounding.rules.len(),
            debugging_rules: gamma.ground.rules.len() + gamma.assumptions.len(),
            assumptions: gamma.assumptions.len(),
            warnings,
        };
        let session = match Session::start(&program, gamma, input.sample_limit) {
            Ok(s) => s,
            Err(aspdbg_core::diagnosis::DiagnosisError::TestPassed) => {
                return Err(Error::TestPassed)
            }
            Err(e) => return Err(Error::Input(e.to_string())),
        };
        Ok(Engine {
            sources,
            program,
            test,
            session,
            report,
            seq: 0,
            done: false,
        })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn sources(&self) -> &Sources {
        &self.sources
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn message(&mut self, payload: Payload) -> SessionMessage {
        self.seq += 1;
        SessionMessage::new(self.seq, payload)
    }

    /// `hello`, `ground_report`, then the first `diagnosis` and `queries`.
    pub fn opening(&mut self) -> Vec<SessionMessage> {
        let hello = Payload::Hello {
            version: PROTOCOL_VERSION.to_string(),
            files: self.sources.file_names(),
            test: self.test.asserted.iter().map(|l| l.to_string()).collect(),
            max_models_per_query: self.session.sample_limit().0,
        };
        let report = self.report.clone();
        let mut out = vec![self.message(hello), self.message(report)];
        out.extend(self.state());
        out
    }

    /// The current `diagnosis` and `queries` pair.
    pub fn state(&mut self) -> Vec<SessionMessage> {
        let (d, q) = (self.diagnosis(), self.queries());
        vec![self.message(d), self.message(q)]
    }

    fn diagnosis(&self) -> Payload {
        let s = &self.session;
        Payload::Diagnosis {
            step: s.answered().len(),
            status: match s.status() {
                SessionStatus::Open => Status::Open,
                SessionStatus::Finished => Status::Finished,
                SessionStatus::Inconsistent => Status::Inconsistent,
            },
            reason: s.reason_atoms().iter().map(|a| a.to_string()).collect(),
            minimal: s.reason().minimal,
            findings: self.findings(),
            answered: s
                .answered()
                .iter()
                .map(|(a, v)| AnswerInfo {
                    atom: s.atom(*a).to_string(),
                    value: *v,
                })
                .collect(),
        }
    }

    fn queries(&self) -> Payload {
        let s = &self.session;
        Payload::Queries {
            step: s.answered().len(),
            queries: s
                .queries()
                .iter()
                .map(|q| QueryInfo {
                    atom: s.atom(q.atom).to_string(),
                    q_plus: q.q_plus,
                    q_minus: q.q_minus,
                    score: q.score,
                })
                .collect(),
        }
    }

    /// Findings of the current reason with source spans.
    pub fn findings(&self) -> Vec<FindingInfo> {
        self.session
            .findings()
            .into_iter()
            .map(|f| finding_info(&self.program, &self.sources, f))
            .collect()
    }

    /// Handles one inbound line; malformed input yields an `error`.
    pub fn handle_line(&mut self, line: &str) -> Vec<SessionMessage> {
        match SessionMessage::from_line(line) {
            Ok(m) => self.handle(m),
            Err(e) => {
                let err = Payload::Error {
                    message: format!("malformed message: {e}"),
                    in_reply_to: salvage_seq(line),
                };
                vec![self.message(err)]
            }
        }
    }

    pub fn handle(&mut self, m: SessionMessage) -> Vec<SessionMessage> {
        let error = |message: String| Payload::Error {
            message,
            in_reply_to: m.seq,
        };
        if self.done {
            return vec![self.message(error("session already closed".into()))];
        }
        let next = match &m.payload {
            Payload::Answer { atom, value } => match parse_atom(atom) {
                Ok(a) => self.session.answer(&a, *value).map_err(|e| e.to_string()),
                Err(e) => Err(format!("invalid atom {atom:?}: {}", e.message())),
            },
            Payload::Undo { to_step } => self.session.undo(*to_step).map_err(|e| e.to_string()),
            Payload::Stop {} => {
                self.done = true;
                let mut out: Vec<SessionMessage> = Vec::new();
                for finding in self.findings() {
                    out.push(self.message(Payload::Finding { finding }));
                }
                out.push(self.message(Payload::Bye {}));
                return out;
            }
            _ => Err(format!("unexpected inbound message kind {}", m.kind())),
        };
        match next {
            Ok(s) => {
                self.session = s;
                self.state()
            }
            Err(e) => vec![self.message(error(e))],
        }
    }
}

fn rule_ref(p: &Program, sources: &Sources, id: RuleId) -> RuleRef {
    RuleRef {
        rule_id: id.0,
        span: p.rule(id).map(|r| sources.span(r.span)),
    }
}

fn finding_info(p: &Program, sources: &Sources, f: Finding) -> FindingInfo {
    match f {
        Finding::Rule { rule, instances } => FindingInfo::Rule {
            rule_id: rule.0,
            span: p.rule(rule).map(|r| sources.span(r.span)),
            rule: p.rule(rule).map(|r| r.to_string()).unwrap_or_default(),
            instances: instances
                .into_iter()
                .map(|i| InstanceInfo {
                    substitution: i
                        .substitution
                        .0
                        .iter()
                        .map(|(var, value)| Binding {
                            var: var.clone(),
                            value: value.to_string(),
                        })
                        .collect(),
                    ground_instance: i.ground_instance,
                })
                .collect(),
        },
        Finding::Unsupported {
            atom,
            candidate_rules,
        } => FindingInfo::Unsupported {
            atom: atom.to_string(),
            candidate_rules: candidate_rules
                .into_iter()
                .map(|id| rule_ref(p, sources, id))
                .collect(),
        },
    }
}
