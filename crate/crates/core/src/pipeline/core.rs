//! The cycle loop.
//!
//! Stages and the datapath word each one drives onto its output bus:
//!
//! | stage     | work                                   | bus word                       |
//! |-----------|----------------------------------------|--------------------------------|
//! | Predecode | fetch at `fetch_pc`                    | instruction encoding           |
//! | Decode    | decode, interlock, read register file  | first operand                  |
//! | Execute   | ALU / memory / branch, then commit     | commit word (result, store data, next pc) |
//!
//! The second operand and the decoded fields travel as pipeline-register
//! side band. A boundary whose parity checker fires does not latch: the
//! producing stage holds its inputs and recomputes next cycle, so a
//! transient clears after one retry while a permanent fault repeats on
//! every cycle until the controller's counter reaches the threshold.
//! There is no forwarding; a read-after-write on the instruction in
//! Execute stalls Decode.

use std::collections::BTreeSet;

use super::{
    controller_step, parity_check, switch_route, trc_compare, Actions, BlockId, ControllerOutputs, ControllerState,
    Copy, CoreConfig, InterStageBus, Mode, PowerState, StageKind, SwitchSetting,
};
use crate::fault::{
    apply_faults, apply_output_faults, ControllerCopy, DelayLine, FaultKind, FaultScenario, FaultSite, StressLedger,
    TimedFault,
};
use crate::isa::{ArchState, Instruction, Opcode, Program};

pub use crate::fault::FaultClass;

/// Cycles from the first fetch of a replayed instruction to its commit,
/// counted from the controller's resume cycle.
pub const PIPELINE_DEPTH: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Completed,
    Dead,
    Exhausted,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Completed => "Completed",
            Outcome::Dead => "Dead",
            Outcome::Exhausted => "Exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeadCause {
    /// The two controller copies disagreed.
    ControllerMismatch { cycle: u64 },
    /// A stage already running on its spare failed permanently.
    SparesExhausted { stage: StageKind, cycle: u64 },
}

/// One classified error streak.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryEvent {
    pub stage: StageKind,
    pub class: FaultClass,
    /// First error cycle of the streak.
    pub detect_cycle: u64,
    /// Cycle the controller classified the streak (last error cycle for a
    /// transient, threshold cycle for a permanent).
    pub classify_cycle: u64,
    /// Controller cycle that issued the replay (permanent only).
    pub resume_cycle: Option<u64>,
    /// Cycle the core was back to normal work: the replayed instruction's
    /// commit for a permanent, the first clean cycle for a transient.
    /// `None` if the core died first.
    pub swap_complete_cycle: Option<u64>,
    /// Scenario fault ids active on the observed bus during the streak.
    pub faults: Vec<usize>,
}

impl RecoveryEvent {
    pub fn recovery_cycles(&self) -> Option<u64> {
        self.swap_complete_cycle.map(|c| c - self.detect_cycle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub final_state: ArchState,
    pub total_cycles: u64,
    pub recovery_events: Vec<RecoveryEvent>,
    pub stress: StressLedger,
    pub outcome: Outcome,
    pub dead_cause: Option<DeadCause>,
    pub final_power: [PowerState; 6],
    pub final_switch: SwitchSetting,
    /// Instructions committed, replays included once each.
    pub committed: u64,
    /// Faults whose observed class disagrees with their ground-truth label.
    pub classifier_mismatches: Vec<String>,
    /// Bus faults that never produced a parity error on an observed bus.
    pub unobserved_faults: Vec<usize>,
}

impl SimReport {
    pub fn permanent_events(&self) -> impl Iterator<Item = &RecoveryEvent> {
        self.recovery_events.iter().filter(|e| e.class == FaultClass::Permanent)
    }

    pub fn transient_events(&self) -> impl Iterator<Item = &RecoveryEvent> {
        self.recovery_events.iter().filter(|e| e.class == FaultClass::Transient)
    }
}

#[derive(Debug, Clone, Copy)]
struct FetchLatch {
    pc: u32,
    bus: InterStageBus,
}

#[derive(Debug, Clone, Copy)]
struct ExecLatch {
    pc: u32,
    instr: Instruction,
    op_a: u32,
    op_b: u32,
}

/// What the Execute stage will do with its commit word.
#[derive(Debug, Clone, Copy)]
enum Effect {
    None,
    Halt,
    WriteReg(u8),
    Store(u32),
    Jump,
}

fn execute(latch: &ExecLatch, arch: &ArchState) -> (u32, Effect) {
    let i = &latch.instr;
    let (a, b) = (latch.op_a, latch.op_b);
    match i.opcode {
        Opcode::Nop => (0, Effect::None),
        Opcode::Halt => (0, Effect::Halt),
        Opcode::Ldi | Opcode::Mov => (a, Effect::WriteReg(i.rd)),
        Opcode::Add => (a.wrapping_add(b), Effect::WriteReg(i.rd)),
        Opcode::Sub => (a.wrapping_sub(b), Effect::WriteReg(i.rd)),
        Opcode::And => (a & b, Effect::WriteReg(i.rd)),
        Opcode::Or => (a | b, Effect::WriteReg(i.rd)),
        Opcode::Xor => (a ^ b, Effect::WriteReg(i.rd)),
        Opcode::Ld => (arch.load(a.wrapping_add(i.imm_word())), Effect::WriteReg(i.rd)),
        Opcode::St => (b, Effect::Store(a.wrapping_add(i.imm_word()))),
        Opcode::Beq => {
            let next = if a == b {
                latch.pc.wrapping_add(i.imm_word())
            } else {
                latch.pc.wrapping_add(1)
            };
            (next, Effect::Jump)
        }
        Opcode::Jmp => (a, Effect::Jump),
    }
}

/// Operands as read by Decode: the bus word and the side-band word.
fn decode_operands(i: &Instruction, arch: &ArchState) -> (u32, u32) {
    match i.opcode {
        Opcode::Nop | Opcode::Halt => (0, 0),
        Opcode::Ldi => (i.imm_word(), 0),
        Opcode::Jmp => (i.imm as u16 as u32, 0),
        _ => (arch.reg(i.rs1), arch.reg(i.rs2)),
    }
}

fn hazard(consumer: &Instruction, producer: &Instruction) -> bool {
    if !producer.opcode.writes_rd() || producer.rd == 0 {
        return false;
    }
    (consumer.opcode.reads_rs1() && consumer.rs1 == producer.rd)
        || (consumer.opcode.reads_rs2() && consumer.rs2 == producer.rd)
}

struct Streak {
    start: u64,
    faults: BTreeSet<usize>,
}

struct Sim<'a> {
    program: &'a Program,
    config: &'a CoreConfig,
    scenario: &'a FaultScenario,
    arch: ArchState,
    fetch_pc: u32,
    if_id: Option<FetchLatch>,
    id_ex: Option<ExecLatch>,
    running: bool,
    ctrl_a: ControllerState,
    ctrl_b: ControllerState,
    power: [PowerState; 6],
    switch: SwitchSetting,
    delay_lines: [DelayLine; 6],
    ledger: StressLedger,
    streaks: [Option<Streak>; 3],
    events: Vec<RecoveryEvent>,
    /// Permanent events waiting for their replayed instruction to commit.
    open_repairs: Vec<usize>,
    committed: u64,
}

/// Runs `program` on the repairable core under `scenario`.
///
/// The run ends when `HALT` commits (`Completed`), the controller fail-stops
/// (`Dead`) or `config.max_cycles` elapse (`Exhausted`).
pub fn run_core(program: &Program, config: &CoreConfig, scenario: &FaultScenario) -> SimReport {
    let mut power = [PowerState::Off; 6];
    for kind in StageKind::ALL {
        power[BlockId::new(kind, Copy::Main).index()] = PowerState::On;
    }
    let mut sim = Sim {
        program,
        config,
        scenario,
        arch: ArchState::for_program(program),
        fetch_pc: program.origin(),
        if_id: None,
        id_ex: None,
        running: true,
        ctrl_a: ControllerState::new(program.origin()),
        ctrl_b: ControllerState::new(program.origin()),
        power,
        switch: SwitchSetting::default(),
        delay_lines: [DelayLine::default(); 6],
        ledger: StressLedger::new(),
        streaks: [None, None, None],
        events: Vec::new(),
        open_repairs: Vec::new(),
        committed: 0,
    };

    let mut outcome = Outcome::Exhausted;
    let mut dead_cause = None;
    for cycle in 0..config.max_cycles {
        match sim.cycle(cycle) {
            Step::Continue => {}
            Step::Halted => {
                outcome = Outcome::Completed;
                break;
            }
            Step::Dead(cause) => {
                outcome = Outcome::Dead;
                dead_cause = Some(cause);
                break;
            }
        }
    }
    if outcome != Outcome::Completed {
        sim.arch.pc = sim.oldest_uncommitted();
    }
    let (classifier_mismatches, unobserved_faults) = audit_classes(scenario, config, &sim.events);
    SimReport {
        final_state: sim.arch,
        total_cycles: sim.ledger.elapsed(),
        recovery_events: sim.events,
        stress: sim.ledger,
        outcome,
        dead_cause,
        final_power: sim.power,
        final_switch: sim.switch,
        committed: sim.committed,
        classifier_mismatches,
        unobserved_faults,
    }
}

enum Step {
    Continue,
    Halted,
    Dead(DeadCause),
}

impl Sim<'_> {
    fn oldest_uncommitted(&self) -> u32 {
        self.id_ex
            .map(|l| l.pc)
            .or(self.if_id.map(|l| l.pc))
            .unwrap_or(self.fetch_pc)
    }

    fn faults_on(&self, site: FaultSite, cycle: u64) -> impl Iterator<Item = (usize, &TimedFault)> {
        self.scenario
            .faults
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.site == site && f.is_active(cycle))
    }

    /// Drives one stage's fresh output through both copies and the switch.
    fn route(&mut self, stage: StageKind, fresh: InterStageBus, cycle: u64) -> InterStageBus {
        let mut out = [InterStageBus::default(); 2];
        for (slot, copy) in [Copy::Main, Copy::Spare].into_iter().enumerate() {
            let block = BlockId::new(stage, copy);
            if self.power[block.index()] != PowerState::On {
                // Unpowered blocks float low and are immune to their faults.
                self.delay_lines[block.index()].reset(InterStageBus::default());
                continue;
            }
            let kinds: Vec<FaultKind> = self
                .faults_on(FaultSite::Bus(block), cycle)
                .map(|(_, f)| f.kind)
                .collect();
            let extra = kinds
                .iter()
                .filter_map(|k| match k {
                    FaultKind::Delay { extra, .. } => Some(*extra),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            let stale = self.delay_lines[block.index()].observe(fresh, extra);
            out[slot] = apply_faults(fresh, kinds.iter(), stale);
        }
        switch_route(self.switch.get(stage), out[0], out[1])
    }

    fn cycle(&mut self, cycle: u64) -> Step {
        let idle = InterStageBus::default();
        let running = self.running;

        // Stage outputs from the start-of-cycle latches.
        let fetch_word = self.program.fetch(self.fetch_pc).encode();
        let fresh_p = if running {
            InterStageBus::encode(fetch_word)
        } else {
            idle
        };

        let mut decoded = None;
        let mut interlocked = false;
        let mut fresh_d = idle;
        if let (true, Some(latch)) = (running, self.if_id) {
            let instr = Instruction::decode(latch.bus.data);
            interlocked = self.id_ex.is_some_and(|ex| hazard(&instr, &ex.instr));
            if !interlocked {
                let (a, b) = decode_operands(&instr, &self.arch);
                fresh_d = InterStageBus::encode(a);
                decoded = Some((latch.pc, instr, b));
            }
        }

        let mut executed = None;
        let mut fresh_e = idle;
        if let (true, Some(latch)) = (running, self.id_ex) {
            let (word, effect) = execute(&latch, &self.arch);
            fresh_e = InterStageBus::encode(word);
            executed = Some((latch, effect));
        }

        let bus_p = self.route(StageKind::Predecode, fresh_p, cycle);
        let bus_d = self.route(StageKind::Decode, fresh_d, cycle);
        let bus_e = self.route(StageKind::Execute, fresh_e, cycle);
        let errors = [parity_check(&bus_p), parity_check(&bus_d), parity_check(&bus_e)];

        // Duplicated controller with two-rail comparison.
        if self.ctrl_a.mode.pipeline_running() {
            let pc = self.oldest_uncommitted();
            self.ctrl_a.replay_pc = pc;
            self.ctrl_b.replay_pc = pc;
        }
        let (next_a, actions) = controller_step(&self.ctrl_a, errors, false, self.config);
        let (next_b, actions_b) = controller_step(&self.ctrl_b, errors, false, self.config);
        let rail_a = self.controller_rail(
            ControllerCopy::A,
            ControllerOutputs::encode(&next_a.mode, &actions),
            cycle,
        );
        let rail_b = self.controller_rail(
            ControllerCopy::B,
            ControllerOutputs::encode(&next_b.mode, &actions_b).complemented(),
            cycle,
        );
        let trc_ok = trc_compare(rail_a.as_rail(), rail_b.as_rail()).unwrap_or(false);
        if !trc_ok {
            self.ctrl_a = controller_step(&self.ctrl_a, errors, true, self.config).0;
            self.ctrl_b = self.ctrl_a.clone();
            self.ledger.record(&self.power);
            return Step::Dead(DeadCause::ControllerMismatch { cycle });
        }

        self.track_streaks(cycle, errors, &actions);
        let prev_mode = self.ctrl_a.mode;
        self.ctrl_a = next_a;
        self.ctrl_b = next_b;

        if self.ctrl_a.mode == Mode::Dead {
            let stage = actions.permanent.first().expect("dead without a cause");
            self.ledger.record(&self.power);
            return Step::Dead(DeadCause::SparesExhausted { stage, cycle });
        }

        let mut halted = false;
        if running && prev_mode.pipeline_running() && !actions.flush {
            halted = self.advance(cycle, [bus_p, bus_d, bus_e], errors, decoded, interlocked, executed);
        }
        if actions.flush {
            self.if_id = None;
            self.id_ex = None;
            self.running = false;
        }
        if actions.replay {
            self.fetch_pc = self.ctrl_a.replay_pc;
            self.running = true;
            for &idx in &self.open_repairs {
                self.events[idx].resume_cycle = Some(cycle);
            }
        }

        self.ledger.record(&self.power);
        self.apply_power(&actions);
        if halted {
            Step::Halted
        } else {
            Step::Continue
        }
    }

    fn controller_rail(&self, copy: ControllerCopy, out: ControllerOutputs, cycle: u64) -> ControllerOutputs {
        let kinds: Vec<FaultKind> = self
            .faults_on(FaultSite::Controller(copy), cycle)
            .map(|(_, f)| f.kind)
            .collect();
        ControllerOutputs(apply_output_faults(out.0, kinds.iter()))
    }

    /// Latches every boundary whose checker is clean. Returns true when
    /// `HALT` commits.
    fn advance(
        &mut self,
        cycle: u64,
        buses: [InterStageBus; 3],
        errors: [u8; 3],
        decoded: Option<(u32, Instruction, u32)>,
        interlocked: bool,
        executed: Option<(ExecLatch, Effect)>,
    ) -> bool {
        let [bus_p, bus_d, bus_e] = buses;
        let [err_p, err_d, err_e] = errors.map(|m| m != 0);
        let mut halted = false;
        let mut redirect = None;

        let ex_free = match executed {
            None => true,
            Some(_) if err_e => false,
            Some((latch, effect)) => {
                let word = bus_e.data;
                match effect {
                    Effect::None => {}
                    Effect::Halt => halted = true,
                    Effect::WriteReg(rd) => self.arch.set_reg(rd, word),
                    Effect::Store(addr) => {
                        self.arch.mem.insert(addr, word);
                    }
                    Effect::Jump => {
                        if word != latch.pc.wrapping_add(1) {
                            redirect = Some(word);
                        }
                    }
                }
                self.arch.pc = if halted {
                    latch.pc
                } else {
                    word_next_pc(&latch, effect, word)
                };
                self.committed += 1;
                self.close_repairs(cycle);
                true
            }
        };

        let decode_delivers = ex_free && !interlocked && !err_d && decoded.is_some();
        let next_id_ex = if ex_free {
            match decoded {
                Some((pc, instr, op_b)) if decode_delivers => Some(ExecLatch {
                    pc,
                    instr,
                    op_a: bus_d.data,
                    op_b,
                }),
                _ => None,
            }
        } else {
            self.id_ex
        };
        let if_free = self.if_id.is_none() || decode_delivers;
        let next_if_id = if if_free {
            if err_p {
                None
            } else {
                let latch = FetchLatch {
                    pc: self.fetch_pc,
                    bus: bus_p,
                };
                self.fetch_pc = self.fetch_pc.wrapping_add(1);
                Some(latch)
            }
        } else {
            self.if_id
        };

        self.id_ex = next_id_ex;
        self.if_id = next_if_id;
        if let Some(target) = redirect {
            self.if_id = None;
            self.id_ex = None;
            self.fetch_pc = target;
        }
        if halted {
            self.arch.halted = true;
        }
        halted
    }

    fn close_repairs(&mut self, cycle: u64) {
        for idx in self.open_repairs.drain(..) {
            if self.events[idx].resume_cycle.is_some() {
                self.events[idx].swap_complete_cycle = Some(cycle);
            }
        }
    }

    fn track_streaks(&mut self, cycle: u64, errors: [u8; 3], actions: &Actions) {
        if !self.ctrl_a.mode.pipeline_running() {
            return;
        }
        for stage in StageKind::ALL {
            let idx = stage.index();
            if errors[idx] != 0 {
                let site = FaultSite::Bus(BlockId::new(stage, self.switch.get(stage)));
                let active: Vec<usize> = self.faults_on(site, cycle).map(|(id, _)| id).collect();
                let streak = self.streaks[idx].get_or_insert_with(|| Streak {
                    start: cycle,
                    faults: BTreeSet::new(),
                });
                streak.faults.extend(active);
            }
            if actions.transient.contains(stage) {
                if let Some(streak) = self.streaks[idx].take() {
                    self.events.push(RecoveryEvent {
                        stage,
                        class: FaultClass::Transient,
                        detect_cycle: streak.start,
                        classify_cycle: cycle - 1,
                        resume_cycle: None,
                        swap_complete_cycle: Some(cycle),
                        faults: streak.faults.into_iter().collect(),
                    });
                }
            }
            if actions.permanent.contains(stage) {
                if let Some(streak) = self.streaks[idx].take() {
                    self.open_repairs.push(self.events.len());
                    self.events.push(RecoveryEvent {
                        stage,
                        class: FaultClass::Permanent,
                        detect_cycle: streak.start,
                        classify_cycle: cycle,
                        resume_cycle: None,
                        swap_complete_cycle: None,
                        faults: streak.faults.into_iter().collect(),
                    });
                }
            }
        }
        if !actions.permanent.is_empty() {
            // A repair flushes every other partial streak.
            self.streaks = [None, None, None];
        }
    }

    fn apply_power(&mut self, actions: &Actions) {
        for p in self.power.iter_mut() {
            if let PowerState::PoweringUp { remaining } = *p {
                *p = if remaining <= 1 {
                    PowerState::On
                } else {
                    PowerState::PoweringUp {
                        remaining: remaining - 1,
                    }
                };
            }
        }
        for b in actions.power_off.iter() {
            self.power[b.index()] = PowerState::Off;
        }
        for b in actions.power_on.iter() {
            self.power[b.index()] = PowerState::PoweringUp {
                remaining: self.config.powerup_cycles_per_block,
            };
        }
        for s in actions.switch_flip.iter() {
            self.switch.flip(s);
        }
    }
}

fn word_next_pc(latch: &ExecLatch, effect: Effect, word: u32) -> u32 {
    match effect {
        Effect::Jump => word,
        _ => latch.pc.wrapping_add(1),
    }
}

fn audit_classes(scenario: &FaultScenario, config: &CoreConfig, events: &[RecoveryEvent]) -> (Vec<String>, Vec<usize>) {
    let mut mismatches = Vec::new();
    let mut unobserved = Vec::new();
    for (id, fault) in scenario.faults.iter().enumerate() {
        if !matches!(fault.site, FaultSite::Bus(_)) {
            continue;
        }
        let truth = fault.ground_truth(config.permanent_threshold);
        let seen = |class| events.iter().any(|e| e.class == class && e.faults.contains(&id));
        let observed = if seen(FaultClass::Permanent) {
            FaultClass::Permanent
        } else if seen(FaultClass::Transient) {
            FaultClass::Transient
        } else {
            unobserved.push(id);
            continue;
        };
        if observed != truth {
            mismatches.push(format!("fault {id} ({fault}): labelled {truth}, observed {observed}"));
        }
    }
    (mismatches, unobserved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::{parse_scenario, FaultDuration};
    use crate::isa::{assemble, run_reference};
    use crate::workload::{canonical_cases, canonical_program};

    fn run(src: &str, scenario: &str) -> (Program, SimReport) {
        let program = assemble(src).unwrap();
        let report = run_core(&program, &CoreConfig::default(), &parse_scenario(scenario).unwrap());
        (program, report)
    }

    fn matches_reference(program: &Program, report: &SimReport) -> bool {
        run_reference(program, 1_000_000).0 == report.final_state
    }

    #[test]
    fn fault_free_ldi_halt() {
        let (p, r) = run("LDI r1, 7\nHALT", "");
        assert_eq!(r.outcome, Outcome::Completed);
        assert_eq!(r.final_state.reg(1), 7);
        assert!(r.recovery_events.is_empty());
        assert!(matches_reference(&p, &r));
        // Two instructions through a three-deep pipeline.
        assert_eq!(r.total_cycles, 4);
        assert!(r.stress.is_conserved());
    }

    #[test]
    fn hazards_stall_without_changing_results() {
        let src = "LDI r1, 3\nADD r2, r1, r1\nADD r3, r2, r1\nST r3, r0, 5\nLD r4, r0, 5\nSUB r5, r4, r1\nHALT";
        let (p, r) = run(src, "");
        assert!(matches_reference(&p, &r));
        assert_eq!(r.final_state.reg(5), 6);
        assert_eq!(r.committed, 7);
    }

    #[test]
    fn canonical_program_fault_free() {
        let p = canonical_program();
        let r = run_core(&p, &CoreConfig::default(), &FaultScenario::empty());
        assert_eq!(r.outcome, Outcome::Completed);
        assert!(matches_reference(&p, &r));
        assert_eq!(r.final_state.load(74), 55);
        assert_eq!(r.final_state.load(100), 0);
    }

    #[test]
    fn decode_stuck_at_swaps_once_with_exact_accounting() {
        let cfg = CoreConfig::default();
        let p = canonical_program();
        let s = parse_scenario("@10 PERM decode.main stuckat 3 1").unwrap();
        let r = run_core(&p, &cfg, &s);
        assert_eq!(r.outcome, Outcome::Completed);
        assert!(matches_reference(&p, &r));
        let events: Vec<_> = r.permanent_events().collect();
        assert_eq!(events.len(), 1, "{:?}", r.recovery_events);
        let e = events[0];
        assert_eq!(e.stage, StageKind::Decode);
        assert_eq!(e.faults, vec![0]);
        assert_eq!(e.classify_cycle - e.detect_cycle + 1, cfg.permanent_threshold as u64);
        let resume = e.resume_cycle.unwrap();
        let expected = cfg.permanent_threshold as u64
            + cfg.flush_cycles as u64
            + cfg.powerup_cycles_per_block as u64
            + PIPELINE_DEPTH;
        assert_eq!(e.recovery_cycles(), Some(expected));
        assert_eq!(e.swap_complete_cycle, Some(resume + PIPELINE_DEPTH));
        assert_eq!(r.final_switch.get(StageKind::Decode), Copy::Spare);
        assert_eq!(
            r.final_power[BlockId::new(StageKind::Decode, Copy::Main).index()],
            PowerState::Off
        );
        assert_eq!(
            r.final_power[BlockId::new(StageKind::Decode, Copy::Spare).index()],
            PowerState::On
        );
        assert!(r.classifier_mismatches.is_empty(), "{:?}", r.classifier_mismatches);
    }

    #[test]
    fn single_cycle_flip_is_transient() {
        let p = canonical_program();
        let s = parse_scenario("@12 T:1 execute.main flip 5").unwrap();
        let r = run_core(&p, &CoreConfig::default(), &s);
        assert_eq!(r.outcome, Outcome::Completed);
        assert!(matches_reference(&p, &r));
        assert_eq!(r.permanent_events().count(), 0);
        let t: Vec<_> = r.transient_events().collect();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].detect_cycle, 12);
        assert_eq!(t[0].swap_complete_cycle, Some(13));
        assert_eq!(r.final_switch, SwitchSetting::default());
    }

    #[test]
    fn canonical_cases_recover() {
        let cfg = CoreConfig::default();
        let p = canonical_program();
        for case in canonical_cases() {
            let r = run_core(&p, &cfg, &case.scenario);
            assert_eq!(r.outcome, Outcome::Completed, "{}", case.name);
            assert!(matches_reference(&p, &r), "{}", case.name);
            assert_eq!(
                r.permanent_events().count(),
                1,
                "{}: {:?}",
                case.name,
                r.recovery_events
            );
            assert!(r.stress.is_conserved());
        }
    }

    #[test]
    fn spare_stress_matches_event_log() {
        let cfg = CoreConfig::default();
        let p = canonical_program();
        let r = run_core(&p, &cfg, &parse_scenario("@10 PERM execute.main stuckat 0 1").unwrap());
        let e = r.permanent_events().next().unwrap();
        let spare = r.stress.get(BlockId::new(StageKind::Execute, Copy::Spare));
        let main = r.stress.get(BlockId::new(StageKind::Execute, Copy::Main));
        // Power-on is requested on the last flush cycle and takes effect next.
        let ramp_start = e.classify_cycle + cfg.flush_cycles as u64 + 1;
        assert_eq!(spare.off_cycles, ramp_start);
        assert_eq!(spare.powering_cycles, cfg.powerup_cycles_per_block as u64);
        assert_eq!(spare.on_cycles, r.total_cycles - ramp_start - spare.powering_cycles);
        assert_eq!(main.on_cycles, e.classify_cycle + 1);
    }

    #[test]
    fn fault_on_cold_spare_is_dormant() {
        let p = canonical_program();
        let s = parse_scenario("@0 PERM decode.spare stuckat 3 1").unwrap();
        let r = run_core(&p, &CoreConfig::default(), &s);
        assert_eq!(r.outcome, Outcome::Completed);
        assert!(r.recovery_events.is_empty());
        assert_eq!(r.unobserved_faults, vec![0]);
    }

    #[test]
    fn failing_spare_is_dead() {
        let p = canonical_program();
        let s = parse_scenario("@10 PERM decode.main stuckat 3 1\n@0 PERM decode.spare stuckat 3 1").unwrap();
        let r = run_core(&p, &CoreConfig::default(), &s);
        assert_eq!(r.outcome, Outcome::Dead);
        assert!(matches!(
            r.dead_cause,
            Some(DeadCause::SparesExhausted {
                stage: StageKind::Decode,
                ..
            })
        ));
        assert_eq!(r.permanent_events().count(), 2);
        assert!(r.stress.is_conserved());
    }

    #[test]
    fn controller_line_fault_is_fail_stop() {
        let p = canonical_program();
        // Bit 0 is the flush request; idle outputs drive it low.
        let r = run_core(
            &p,
            &CoreConfig::default(),
            &parse_scenario("@7 PERM ctrl.a stuckat 0 1").unwrap(),
        );
        assert_eq!(r.outcome, Outcome::Dead);
        assert_eq!(r.dead_cause, Some(DeadCause::ControllerMismatch { cycle: 7 }));
        assert_eq!(r.total_cycles, 8);
    }

    #[test]
    fn simultaneous_faults_power_up_in_sequence() {
        let cfg = CoreConfig::default();
        let p = canonical_program();
        let s = parse_scenario("@10 PERM decode.main stuckat 3 1\n@10 PERM execute.main stuckat 3 1").unwrap();
        let r = run_core(&p, &cfg, &s);
        assert_eq!(r.outcome, Outcome::Completed);
        assert!(matches_reference(&p, &r));
        for e in r.permanent_events() {
            assert!(e.swap_complete_cycle.unwrap() > e.detect_cycle);
        }
        for kind in StageKind::ALL {
            let on = [Copy::Main, Copy::Spare]
                .iter()
                .filter(|&&c| r.final_power[BlockId::new(kind, c).index()] == PowerState::On)
                .count();
            assert_eq!(on, 1);
        }
    }

    #[test]
    fn cycle_budget_exhausts() {
        let p = assemble("loop: JMP loop").unwrap();
        let cfg = CoreConfig {
            max_cycles: 50,
            ..CoreConfig::default()
        };
        let r = run_core(&p, &cfg, &FaultScenario::empty());
        assert_eq!(r.outcome, Outcome::Exhausted);
        assert_eq!(r.total_cycles, 50);
        assert!(r.stress.is_conserved());
    }

    #[test]
    fn long_flip_is_labelled_permanent() {
        let p = canonical_program();
        let cfg = CoreConfig::default();
        let mut s = parse_scenario("@10 T:40 decode.main flip 2").unwrap();
        assert_eq!(s.faults[0].duration, FaultDuration::Cycles(40));
        let r = run_core(&p, &cfg, &s);
        assert_eq!(r.permanent_events().count(), 1);
        assert!(r.classifier_mismatches.is_empty());
        s.faults[0].duration = FaultDuration::Cycles(3);
        let r = run_core(&p, &cfg, &s);
        assert_eq!(r.permanent_events().count(), 0);
        assert!(matches_reference(&p, &r));
    }
}
