#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "controller_golden.hpp"
#include "tgrasp/controller.hpp"
#include "tgrasp/errors.hpp"
#include "tgrasp/simulator.hpp"

using namespace tgrasp;
using P = ControllerPhase;
using testutil::all_events;
using testutil::golden;

namespace {

GraspRecording scenario(GraspState st, std::uint64_t seed) {
  ScenarioSpec s;
  s.scenario = st;
  s.seed = seed;
  s.noise_sd = 0.01;
  switch (st.kind()) {
    case GraspKind::Null: break;
    case GraspKind::Good: s.contact_frame.fill(14); break;
    case GraspKind::BranchInterference: {
      s.contact_frame.fill(14);
      const auto f = static_cast<std::size_t>(st.finger());
      s.branch_patch = TaxelRect{12, 15, f * 4, f * 4 + 3};
      break;
    }
    case GraspKind::Obstructed:
      s.contact_frame.fill(32);
      s.contact_frame[static_cast<std::size_t>(st.finger())] = 13;
      break;
  }
  return synthesize_grasp(s);
}

std::size_t count(const std::vector<Action>& a, const Action& x) {
  return static_cast<std::size_t>(std::count(a.begin(), a.end(), x));
}

}  // namespace

TEST_CASE("controller: exhaustive transition table") {
  std::size_t cases = 0;
  for (bool recheck : {false, true}) {
    ControllerConfig cfg;
    cfg.recheck_after_release = recheck;
    for (std::size_t ph = 0; ph < kControllerPhases; ++ph) {
      for (std::size_t retries = 0; retries <= cfg.max_retries; ++retries) {
        for (unsigned mask = 0; mask < 16; ++mask) {
          ControllerState s;
          s.phase = static_cast<P>(ph);
          s.retry_count = retries;
          for (std::size_t f = 0; f < 4; ++f) s.finger_open[f] = (mask >> f) & 1u;
          for (const auto& e : all_events()) {
            const auto got = step(s, e, cfg);
            const auto want = golden(s, e, cfg);
            CAPTURE(phase_name(s.phase));
            CAPTURE(e.to_string());
            CHECK(got.state.phase == want.phase);
            CHECK(got.actions == want.actions);
            CHECK(got.state.retry_count == want.retries);
            CHECK(got.warning.has_value() == want.ignored);
            if (want.ignored) CHECK(got.state == s);
            ++cases;
          }
        }
      }
    }
  }
  CHECK(cases == 2 * 7 * 3 * 16 * 12);
}

TEST_CASE("controller: reaction examples") {
  ControllerState g;
  g.phase = P::Grasping;
  auto r = step(g, ControllerEvent::classified(GraspState::good()));
  CHECK(r.state.phase == P::Detaching);
  CHECK(r.actions == std::vector<Action>{Action::detach()});

  r = step(g, ControllerEvent::classified(GraspState::null()));
  CHECK(r.state.phase == P::Approaching);
  CHECK(r.actions == std::vector<Action>{Action::open_all(), Action::request_reposition()});
  CHECK(r.state.retry_count == 1);

  r = step(g, ControllerEvent::classified(GraspState::branch(2)));
  CHECK(r.state.phase == P::Detaching);
  CHECK(r.actions == std::vector<Action>{Action::open_finger(2), Action::detach()});
  CHECK(r.state.finger_open[2]);
}

TEST_CASE("controller: finger state follows the actions") {
  ControllerState s;
  s = step(s, ControllerEvent::phase_complete()).state;
  s = step(s, ControllerEvent::phase_complete()).state;
  CHECK(s.finger_open == std::array<bool, 4>{false, false, false, false});
  ControllerConfig cfg;
  cfg.recheck_after_release = true;
  s = step(s, ControllerEvent::classified(GraspState::branch(1)), cfg).state;
  CHECK(s.phase == P::Holding);
  CHECK(s.finger_open == std::array<bool, 4>{false, true, false, false});
}

TEST_CASE("controller: classified event without a state is ignored") {
  ControllerState s;
  s.phase = P::Grasping;
  const auto r = step(s, ControllerEvent{EventKind::Classified, std::nullopt});
  CHECK(r.state == s);
  CHECK(r.warning);
}

TEST_CASE("controller: safety over random event streams") {
  std::mt19937_64 rng(17);
  const auto ev = all_events();
  std::uniform_int_distribution<std::size_t> pick(0, ev.size() - 1);
  for (int run = 0; run < 500; ++run) {
    ControllerConfig cfg;
    cfg.recheck_after_release = run % 2;
    ControllerState s;
    for (int i = 0; i < 40; ++i) {
      const auto& e = ev[pick(rng)];
      const auto r = step(s, e, cfg);
      for (const auto& a : r.actions) {
        if (a.kind != ActionKind::OpenFinger) continue;
        REQUIRE(e.state);
        CHECK(e.state->kind() == GraspKind::BranchInterference);
        CHECK(e.state->finger() == a.finger);
      }
      s = r.state;
    }
  }
}

TEST_CASE("run_cycle: good grasp detaches once") {
  const std::vector<GraspRecording> a{scenario(GraspState::good(), 1)};
  const auto rep = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{});
  CHECK(rep.final_state.phase == P::Detaching);
  CHECK(count(rep.actions, Action::detach()) == 1);
  CHECK(rep.attempts == 1);
  CHECK_FALSE(rep.incomplete);
}

TEST_CASE("run_cycle: null grasp retries then faults") {
  const std::vector<GraspRecording> a{scenario(GraspState::null(), 2)};
  ControllerConfig cfg;
  cfg.max_retries = 1;
  const auto rep = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{}, cfg);
  CHECK(rep.final_state.phase == P::Faulted);
  CHECK(rep.attempts == 2);
  CHECK(count(rep.actions, Action::request_reposition()) == 1);
  CHECK(count(rep.actions, Action::abort()) == 1);
}

TEST_CASE("run_cycle: a retry can succeed on the next attempt") {
  const std::vector<GraspRecording> a{scenario(GraspState::obstructed(1), 3),
                                      scenario(GraspState::good(), 4)};
  const auto rep = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{});
  CHECK(rep.attempts == 2);
  CHECK(rep.final_state.phase == P::Detaching);
  REQUIRE(rep.classifications.size() == 2);
  CHECK(rep.classifications[0] == GraspState::obstructed(1));
}

TEST_CASE("run_cycle: branch opens the finger before detaching") {
  const std::vector<GraspRecording> a{scenario(GraspState::branch(0), 5)};
  const auto rep = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{});
  const auto open = std::find(rep.actions.begin(), rep.actions.end(), Action::open_finger(0));
  const auto det = std::find(rep.actions.begin(), rep.actions.end(), Action::detach());
  REQUIRE(open != rep.actions.end());
  REQUIRE(det != rep.actions.end());
  CHECK(open < det);

  ControllerConfig cfg;
  cfg.recheck_after_release = true;
  const auto re = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{}, cfg);
  CHECK(re.final_state.phase == P::Detaching);
  CHECK(count(re.actions, Action::open_finger(0)) == 1);
  CHECK(re.classifications.size() == 2);
  CHECK(re.classifications[1] == GraspState::good());
}

TEST_CASE("run_cycle: stream cut mid-grasp is incomplete") {
  auto rec = scenario(GraspState::good(), 6);
  rec.frames.resize(rec.phases.grasp + 5);
  const std::vector<GraspRecording> a{rec};
  const auto rep = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{});
  CHECK(rep.incomplete);
  CHECK(rep.final_state.phase == P::Grasping);
  CHECK(rep.serialize().find("incomplete=1") != std::string::npos);
}

TEST_CASE("run_cycle: timeout without a classification") {
  const std::vector<GraspRecording> a{scenario(GraspState::good(), 7)};
  ControllerConfig cfg;
  cfg.timeout_frames = 5;
  cfg.max_retries = 0;
  const auto rep = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{}, cfg);
  CHECK(rep.final_state.phase == P::Faulted);
  CHECK(rep.lines.back().event == "timeout");
}

TEST_CASE("run_cycle: liveness and safety over the benchmark") {
  const auto recs = generate_benchmark(kDefaultBenchmarkSeed);
  for (std::size_t retries : {0u, 2u}) {
    for (bool recheck : {false, true}) {
      ControllerConfig cfg;
      cfg.max_retries = retries;
      cfg.recheck_after_release = recheck;
      for (std::size_t i = 0; i < recs.size(); i += 3) {
        const std::span<const GraspRecording> one(&recs[i], 1);
        const auto rep = run_cycle(one, EstimatorConfig::shipped(), PipelineConfig{}, cfg);
        CHECK_FALSE(rep.incomplete);
        CHECK(rep.attempts <= retries + 1);
        const auto ph = rep.final_state.phase;
        CHECK((ph == P::Detaching || ph == P::Releasing || ph == P::Faulted));
        for (const auto& l : rep.lines) {
          for (const auto& act : l.actions) {
            if (act.kind != ActionKind::OpenFinger) continue;
            REQUIRE(l.classification);
            CHECK(*l.classification == GraspState::branch(act.finger));
          }
        }
      }
    }
  }
}

TEST_CASE("run_cycle: serialized report") {
  const std::vector<GraspRecording> a{scenario(GraspState::branch(3), 8)};
  const auto text = run_cycle(a, EstimatorConfig::shipped(), PipelineConfig{}).serialize();
  CHECK(text.find("event=classified:branch:3 state=detaching retries=0 actions=open_finger:3,detach") !=
        std::string::npos);
  CHECK(text.rfind("final state=detaching retries=0 attempts=1 incomplete=0\n") != std::string::npos);
  CHECK_THROWS_AS(run_cycle(std::span<const GraspRecording>{}, EstimatorConfig::shipped(), PipelineConfig{}),
                  ArgumentError);
}

TEST_CASE("mask_fingers replaces masked fingers with neutral values") {
  DecisionInputs in;
  in.per_finger_max = {0.9, 0.1, 0.2, 0.3};
  in.onsets = {std::size_t{3}, std::size_t{7}, std::size_t{8}, std::nullopt};
  const auto m = mask_fingers(in, {true, false, false, false});
  CHECK(m.per_finger_max == std::array<double, 4>{0.2, 0.1, 0.2, 0.3});
  CHECK(m.onsets[0] == 7u);
}

TEST_CASE("EventQueue hands events over in order") {
  EventQueue q;
  std::thread producer([&] {
    for (int i = 0; i < 200; ++i) {
      q.push(i % 2 ? ControllerEvent::timeout() : ControllerEvent::phase_complete());
    }
    q.close();
  });
  std::vector<ControllerEvent> got;
  while (auto e = q.pop()) got.push_back(*e);
  producer.join();
  REQUIRE(got.size() == 200);
  for (int i = 0; i < 200; ++i) CHECK(got[static_cast<std::size_t>(i)].kind == (i % 2 ? EventKind::Timeout : EventKind::PhaseComplete));
}

TEST_CASE("drain replays queued events through the controller") {
  EventQueue q;
  q.push(ControllerEvent::phase_complete());
  q.push(ControllerEvent::phase_complete());
  q.push(ControllerEvent::classified(GraspState::good()));
  q.push(ControllerEvent::phase_complete());
  q.push(ControllerEvent::phase_complete());
  q.close();
  const auto steps = drain(q, ControllerState{}, ControllerConfig{});
  REQUIRE(steps.size() == 5);
  CHECK(steps.back().state.phase == P::Idle);
  CHECK(steps[2].actions == std::vector<Action>{Action::detach()});
}
