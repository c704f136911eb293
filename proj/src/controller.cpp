#include "tgrasp/controller.hpp"

#include <algorithm>
#include <sstream>

#include "tgrasp/errors.hpp"

namespace tgrasp {

std::string_view phase_name(ControllerPhase p) {
  switch (p) {
    case ControllerPhase::Idle: return "idle";
    case ControllerPhase::Approaching: return "approaching";
    case ControllerPhase::Grasping: return "grasping";
    case ControllerPhase::Holding: return "holding";
    case ControllerPhase::Detaching: return "detaching";
    case ControllerPhase::Releasing: return "releasing";
    case ControllerPhase::Faulted: return "faulted";
  }
  return "?";
}

Action Action::open_finger(int f) {
  if (f < 0 || f >= static_cast<int>(kFingers)) throw ArgumentError("OpenFinger: bad finger");
  return {ActionKind::OpenFinger, f};
}

std::string Action::to_string() const {
  switch (kind) {
    case ActionKind::CloseAll: return "close_all";
    case ActionKind::OpenAll: return "open_all";
    case ActionKind::OpenFinger: return "open_finger:" + std::to_string(finger);
    case ActionKind::Detach: return "detach";
    case ActionKind::Abort: return "abort";
    case ActionKind::RequestReposition: return "request_reposition";
  }
  return "?";
}

std::string ControllerEvent::to_string() const {
  switch (kind) {
    case EventKind::Classified: return "classified:" + (state ? state->to_string() : "?");
    case EventKind::PhaseComplete: return "phase_complete";
    case EventKind::Timeout: return "timeout";
  }
  return "?";
}

namespace {

void apply(ControllerState& s, const Action& a) {
  switch (a.kind) {
    case ActionKind::CloseAll: s.finger_open.fill(false); break;
    case ActionKind::OpenAll: s.finger_open.fill(true); break;
    case ActionKind::OpenFinger: s.finger_open[static_cast<std::size_t>(a.finger)] = true; break;
    default: break;
  }
}

StepResult go(ControllerState s, ControllerPhase next, std::vector<Action> actions) {
  s.phase = next;
  for (const auto& a : actions) apply(s, a);
  return {s, std::move(actions), std::nullopt};
}

StepResult ignore(const ControllerState& s, const ControllerEvent& e) {
  return {s, {},
          "ignored " + e.to_string() + " in state " + std::string(phase_name(s.phase))};
}

// Null, obstructed, timeout and a lost fruit all re-attempt the grasp.
StepResult retry_or_fault(const ControllerState& s, const ControllerConfig& cfg) {
  if (s.retry_count < cfg.max_retries) {
    auto r = go(s, ControllerPhase::Approaching, {Action::open_all(), Action::request_reposition()});
    r.state.retry_count = s.retry_count + 1;
    return r;
  }
  return go(s, ControllerPhase::Faulted, {Action::abort()});
}

}  // namespace

StepResult step(const ControllerState& s, const ControllerEvent& e, const ControllerConfig& cfg) {
  using P = ControllerPhase;
  if (e.kind == EventKind::Classified && !e.state) {
    return {s, {}, "classified event without a state"};
  }
  switch (s.phase) {
    case P::Idle:
      if (e.kind == EventKind::PhaseComplete) return go(s, P::Approaching, {});
      return ignore(s, e);

    case P::Approaching:
      if (e.kind == EventKind::PhaseComplete) return go(s, P::Grasping, {Action::close_all()});
      return ignore(s, e);

    case P::Grasping:
      if (e.kind == EventKind::Timeout) return retry_or_fault(s, cfg);
      if (e.kind != EventKind::Classified) return ignore(s, e);
      switch (e.state->kind()) {
        case GraspKind::Good: return go(s, P::Detaching, {Action::detach()});
        case GraspKind::Null:
        case GraspKind::Obstructed: return retry_or_fault(s, cfg);
        case GraspKind::BranchInterference: {
          const int f = e.state->finger();
          if (cfg.recheck_after_release) return go(s, P::Holding, {Action::open_finger(f)});
          return go(s, P::Detaching, {Action::open_finger(f), Action::detach()});
        }
      }
      break;

    case P::Holding:
      if (e.kind == EventKind::Timeout) return go(s, P::Detaching, {Action::detach()});
      if (e.kind != EventKind::Classified) return ignore(s, e);
      switch (e.state->kind()) {
        case GraspKind::Good: return go(s, P::Detaching, {Action::detach()});
        case GraspKind::Null:
        case GraspKind::Obstructed: return retry_or_fault(s, cfg);
        case GraspKind::BranchInterference: {
          const int f = e.state->finger();
          if (s.finger_open[static_cast<std::size_t>(f)]) return go(s, P::Detaching, {Action::detach()});
          return go(s, P::Holding, {Action::open_finger(f)});
        }
      }
      break;

    case P::Detaching:
      if (e.kind == EventKind::PhaseComplete) return go(s, P::Releasing, {Action::open_all()});
      return ignore(s, e);

    case P::Releasing:
      if (e.kind == EventKind::PhaseComplete) {
        auto r = go(s, P::Idle, {});
        r.state.retry_count = 0;
        return r;
      }
      return ignore(s, e);

    case P::Faulted:
      return ignore(s, e);
  }
  return ignore(s, e);
}

DecisionInputs mask_fingers(DecisionInputs in, const std::array<bool, kFingers>& masked) {
  std::vector<double> kept;
  std::optional<std::size_t> earliest;
  for (std::size_t f = 0; f < kFingers; ++f) {
    if (masked[f]) continue;
    kept.push_back(in.per_finger_max[f]);
    if (in.onsets[f] && (!earliest || *in.onsets[f] < *earliest)) earliest = in.onsets[f];
  }
  if (kept.empty()) return in;
  std::sort(kept.begin(), kept.end());
  const double med = kept[kept.size() / 2];
  for (std::size_t f = 0; f < kFingers; ++f) {
    if (!masked[f]) continue;
    in.per_finger_max[f] = med;
    in.onsets[f] = earliest;
  }
  return in;
}

CycleReport run_cycle(std::span<const GraspRecording> attempts, const EstimatorConfig& estimator,
                      const PipelineConfig& pipeline_cfg, const ControllerConfig& cfg,
                      const std::function<void(std::size_t)>& on_frame) {
  if (attempts.empty()) throw ArgumentError("run_cycle: no recordings");
  // A live stream may stop before its release mark; that is reported as an
  // incomplete cycle rather than rejected.
  for (const auto& r : attempts) {
    const auto& p = r.phases;
    if (r.frames.empty() || !(p.approach <= p.grasp && p.grasp <= p.hold && p.hold <= p.release)) {
      throw StructuralError("run_cycle: recording '" + r.id + "' is empty or has unordered phases");
    }
  }
  estimator.validate();

  CycleReport report;
  ControllerState state;
  TaxelPipeline pipeline(pipeline_cfg);

  auto fire = [&](std::size_t attempt, std::size_t frame, const ControllerEvent& e) {
    auto res = step(state, e, cfg);
    state = res.state;
    CycleLine line{attempt, frame, e.to_string(), e.state, res.actions, state, res.warning};
    if (e.state) report.classifications.push_back(*e.state);
    report.actions.insert(report.actions.end(), res.actions.begin(), res.actions.end());
    report.lines.push_back(std::move(line));
  };
  auto settled = [&] {
    return state.phase == ControllerPhase::Detaching || state.phase == ControllerPhase::Faulted ||
           state.phase == ControllerPhase::Releasing;
  };

  for (std::size_t attempt = 0; !settled(); ++attempt) {
    const auto& rec = attempts[std::min(attempt, attempts.size() - 1)];
    report.attempts = attempt + 1;
    pipeline.reset();
    if (state.phase == ControllerPhase::Idle) fire(attempt, 0, ControllerEvent::phase_complete());

    const std::size_t classify_at = std::max(rec.phases.release, rec.phases.grasp + 1);
    std::optional<std::size_t> grasp_frame;
    bool next_attempt = false;
    for (std::size_t t = 0; t < rec.frames.size() && !settled() && !next_attempt; ++t) {
      pipeline.push(rec.frames[t]);
      if (on_frame) on_frame(t);

      if (state.phase == ControllerPhase::Approaching && t >= rec.phases.grasp) {
        fire(attempt, t, ControllerEvent::phase_complete());
        grasp_frame = t;
      }
      if (state.phase != ControllerPhase::Grasping) continue;

      if (t + 1 >= classify_at) {
        const FrameSpan span{rec.phases.approach, t + 1};
        const auto features = summarize(pipeline.snapshot(span));
        auto inputs = decision_inputs(features, estimator);
        fire(attempt, t, ControllerEvent::classified(decide(inputs, estimator).state));
        // Re-check with released fingers masked out until the controller settles.
        for (std::size_t k = 0; k < kFingers && state.phase == ControllerPhase::Holding; ++k) {
          const auto masked = mask_fingers(inputs, state.finger_open);
          fire(attempt, t, ControllerEvent::classified(decide(masked, estimator).state));
        }
      } else if (grasp_frame && t - *grasp_frame >= cfg.timeout_frames) {
        fire(attempt, t, ControllerEvent::timeout());
      }
      if (state.phase == ControllerPhase::Approaching) next_attempt = true;
    }
    if (!settled() && !next_attempt) {
      report.incomplete = true;
      break;
    }
  }
  report.final_state = state;
  return report;
}

std::string CycleReport::serialize() const {
  std::ostringstream out;
  for (const auto& l : lines) {
    out << "attempt=" << l.attempt << " frame=" << l.frame << " event=" << l.event
        << " state=" << phase_name(l.state.phase) << " retries=" << l.state.retry_count
        << " actions=";
    if (l.actions.empty()) out << '-';
    for (std::size_t i = 0; i < l.actions.size(); ++i) {
      out << (i ? "," : "") << l.actions[i].to_string();
    }
    if (l.warning) out << " warning=\"" << *l.warning << '"';
    out << '\n';
  }
  out << "final state=" << phase_name(final_state.phase) << " retries=" << final_state.retry_count
      << " attempts=" << attempts << " incomplete=" << (incomplete ? 1 : 0) << '\n';
  return out.str();
}

void EventQueue::push(ControllerEvent e) {
  {
    std::lock_guard lock(mu_);
    events_.push_back(std::move(e));
  }
  cv_.notify_one();
}

std::optional<ControllerEvent> EventQueue::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !events_.empty(); });
  if (events_.empty()) return std::nullopt;
  auto e = std::move(events_.front());
  events_.pop_front();
  return e;
}

void EventQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::vector<StepResult> drain(EventQueue& queue, ControllerState start, const ControllerConfig& cfg) {
  std::vector<StepResult> out;
  while (auto e = queue.pop()) {
    out.push_back(step(start, *e, cfg));
    start = out.back().state;
  }
  return out;
}

}  // namespace tgrasp
