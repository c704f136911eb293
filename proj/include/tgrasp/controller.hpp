#pragma once

#include <array>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgrasp/core.hpp"
#include "tgrasp/estimator.hpp"
#include "tgrasp/pipeline.hpp"

namespace tgrasp {

enum class ControllerPhase { Idle, Approaching, Grasping, Holding, Detaching, Releasing, Faulted };
inline constexpr std::size_t kControllerPhases = 7;

std::string_view phase_name(ControllerPhase p);

struct ControllerState {
  ControllerPhase phase = ControllerPhase::Idle;
  std::size_t retry_count = 0;
  /// Fingers currently commanded open. The gripper rests open.
  std::array<bool, kFingers> finger_open{true, true, true, true};

  bool operator==(const ControllerState&) const = default;
};

enum class ActionKind { CloseAll, OpenAll, OpenFinger, Detach, Abort, RequestReposition };

struct Action {
  ActionKind kind;
  int finger = -1;  // OpenFinger only

  static Action close_all() { return {ActionKind::CloseAll}; }
  static Action open_all() { return {ActionKind::OpenAll}; }
  static Action open_finger(int f);
  static Action detach() { return {ActionKind::Detach}; }
  static Action abort() { return {ActionKind::Abort}; }
  static Action request_reposition() { return {ActionKind::RequestReposition}; }

  std::string to_string() const;
  bool operator==(const Action&) const = default;
};

enum class EventKind { Classified, PhaseComplete, Timeout };

struct ControllerEvent {
  EventKind kind;
  std::optional<GraspState> state;  // Classified only

  static ControllerEvent classified(GraspState s) { return {EventKind::Classified, s}; }
  static ControllerEvent phase_complete() { return {EventKind::PhaseComplete, std::nullopt}; }
  static ControllerEvent timeout() { return {EventKind::Timeout, std::nullopt}; }

  std::string to_string() const;
};

struct ControllerConfig {
  std::size_t max_retries = 2;
  /// After opening a branch finger, re-classify the remaining three fingers
  /// before detaching.
  bool recheck_after_release = false;
  /// Frames after the grasp command without a classification before a Timeout.
  std::size_t timeout_frames = 100;
};

struct StepResult {
  ControllerState state;
  std::vector<Action> actions;
  /// Set when the (state, event) pair has no effect.
  std::optional<std::string> warning;
};

/// Total transition function of the gripper reaction state machine.
StepResult step(const ControllerState& state, const ControllerEvent& event,
                const ControllerConfig& cfg = {});

/// One line of a cycle report.
struct CycleLine {
  std::size_t attempt = 0;
  std::size_t frame = 0;
  std::string event;
  std::optional<GraspState> classification;
  std::vector<Action> actions;
  ControllerState state;
  std::optional<std::string> warning;
};

struct CycleReport {
  ControllerState final_state;
  std::vector<CycleLine> lines;
  std::vector<GraspState> classifications;
  std::vector<Action> actions;
  std::size_t attempts = 0;
  bool incomplete = false;

  /// Line-oriented text, one event per line, then a `final` line.
  std::string serialize() const;
};

/// Replays grasp attempts through pipeline, estimator and controller.
/// Attempt k streams attempts[min(k, size - 1)], so a single recording is
/// re-used for every retry.
CycleReport run_cycle(std::span<const GraspRecording> attempts, const EstimatorConfig& estimator,
                      const PipelineConfig& pipeline, const ControllerConfig& cfg = {},
                      const std::function<void(std::size_t frame)>& on_frame = {});

/// Decision inputs with the given fingers removed from consideration: their
/// max variance is replaced by the median of the rest and their onset by the
/// earliest remaining onset.
DecisionInputs mask_fingers(DecisionInputs inputs, const std::array<bool, kFingers>& masked);

/// Strict FIFO hand-over of events from a producer thread to the controller.
class EventQueue {
 public:
  void push(ControllerEvent e);
  /// Blocks until an event is available or the queue is closed and drained.
  std::optional<ControllerEvent> pop();
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ControllerEvent> events_;
  bool closed_ = false;
};

/// Consumes the queue until it is closed; returns every step in order.
std::vector<StepResult> drain(EventQueue& queue, ControllerState start, const ControllerConfig& cfg);

}  // namespace tgrasp
