// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "quadplan/dsl/interpreter.hpp"
#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/printer.hpp"
#include "quadplan/dsl/validator.hpp"

using namespace quadplan;
using namespace quadplan::dsl;

namespace {

ObjectSpec make(const std::string& id, ObjectKind kind, Vec3 bottom_center, Vec3 size, bool movable = false,
                double mass = 0.0) {
  ObjectSpec o;
  o.id = id;
  o.kind = std::move(kind);
  o.pose.position = bottom_center;
  o.size = size;
  o.movable = movable;
  o.mass = mass;
  return o;
}

// Robot at (-1, 0); two 0.2 m steps from x = 1 to x = 2.4; a light box at (0, 1).
Scene yard() {
  Scene s;
  place_robot(s.robot, s.limits, -1.0, 0.0, 0.0, Stance::Quadrupedal);
  add_object(s, make("stairs", StairsKind{{0.2, 0.2}, 0.7}, {1.7, 0, 0}, {1.4, 1.2, 0.4}));
  add_object(s, make("box", BoxKind{}, {0, 1.0, 0}, {0.5, 0.5, 0.2}, true, 5.0));
  add_object(s, make("crate", BoxKind{}, {-1.0, -1.5, 0}, {0.5, 0.5, 0.3}, true, 30.0));
  return s;
}

std::string rules(const std::vector<PlanFault>& faults) {
  std::string out;
  for (const auto& f : faults) {
    out += std::string(fault_category_name(f.category)) + ":" + f.rule + "@" + std::to_string(f.location) + " ";
  }
  return out;
}

Value eval_text(const std::string& text, const Scene* scene = nullptr) {
  Environment env(scene);
  return evaluate(*parse_expression(text), env);
}

// Random well-formed plans for round-trip fuzzing. Numbers are non-negative
// because the parser reads "-1" as negation of 1.
class PlanFuzzer {
 public:
  explicit PlanFuzzer(unsigned seed) : rng_(seed) {}

  ExprPtr expr(int depth) {
    const int pick = depth <= 0 ? roll(3) : roll(10);
    switch (pick) {
      case 0: return make_expr(NumberLit{number()});
      case 1: return make_expr(BoolLit{roll(2) == 0});
      case 2: return make_expr(Var{name()});
      case 3: return make_expr(Unary{roll(2) ? UnOp::Neg : UnOp::Not, expr(depth - 1)});
      case 4:
      case 5:
      case 6: {
        const BinOp op = static_cast<BinOp>(roll(12));
        return make_expr(Binary{op, expr(depth - 1), expr(depth - 1)});
      }
      case 7: return make_expr(Field{expr(depth - 1), "xyz"[roll(3)]});
      case 8: {
        std::vector<ExprPtr> args;
        const int n = roll(4);
        for (int i = 0; i < n; ++i) args.push_back(expr(depth - 1));
        return make_expr(Call{roll(2) ? "min" : "vec3", std::move(args)});
      }
      default: return make_expr(NumberLit{static_cast<double>(roll(100))});
    }
  }

  StmtList block(int depth) {
    StmtList out;
    const int n = 1 + roll(4);
    for (int i = 0; i < n; ++i) out.push_back(statement(depth));
    return out;
  }

  Stmt statement(int depth) {
    const int pick = depth <= 0 ? roll(3) : roll(4);
    switch (pick) {
      case 0: return {Let{name(), expr(3)}, {}, 0};
      case 1: {
        std::vector<ExprPtr> args;
        const int n = roll(5);
        for (int i = 0; i < n; ++i) args.push_back(expr(2));
        return {SkillCall{"walk_to_position", std::move(args)}, {}, 0};
      }
      case 2: return {Fail{roll(2) ? "no way \"up\"" : "a\\b\nc"}, {}, 0};
      default: {
        If b;
        const int arms = 1 + roll(3);
        for (int i = 0; i < arms; ++i) b.arms.push_back({expr(3), block(depth - 1)});
        if (roll(2)) b.else_body = block(depth - 1);
        return {std::move(b), {}, 0};
      }
    }
  }

  Program program() {
    Program p{block(3)};
    number_statements(p);
    return p;
  }

 private:
  int roll(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double number() {
    switch (roll(4)) {
      case 0: return std::uniform_real_distribution<double>(0, 10)(rng_);
      case 1: return std::ldexp(std::uniform_real_distribution<double>(1, 2)(rng_), roll(80) - 40);
      case 2: return 0.1 * roll(30);
      default: return 0.0;
    }
  }
  std::string name() {
    static const std::vector<std::string> names{"a", "robot_x", "box_size_x", "max_step_height", "t_1", "elevated"};
    return names[static_cast<std::size_t>(roll(static_cast<int>(names.size())))];
  }

  std::mt19937 rng_;
};

}  // namespace

// --- parsing ----------------------------------------------------------------

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(print_expression(*parse_expression("1 + 2 * 3")), "1 + 2 * 3");
  EXPECT_EQ(print_expression(*parse_expression("(1 + 2) * 3")), "(1 + 2) * 3");
  EXPECT_EQ(print_expression(*parse_expression("1 - (2 - 3)")), "1 - (2 - 3)");
  EXPECT_EQ(print_expression(*parse_expression("(1 - 2) - 3")), "1 - 2 - 3");
  EXPECT_EQ(print_expression(*parse_expression("not a < b and c or d")), "not a < b and c or d");
  EXPECT_EQ(print_expression(*parse_expression("(not a) < b")), "(not a) < b");
  EXPECT_EQ(print_expression(*parse_expression("-(get_position(box).x)")), "-get_position(box).x");
  EXPECT_EQ(print_expression(*parse_expression("(-a).x")), "(-a).x");
  EXPECT_EQ(print_expression(*parse_expression("a or (b or c)")), "a or (b or c)");

  const ExprPtr e = parse_expression("2 * 3 + 4");
  const auto& top = std::get<Binary>(e->node);
  EXPECT_EQ(top.op, BinOp::Add);
  EXPECT_EQ(std::get<Binary>(top.lhs->node).op, BinOp::Mul);
}

TEST(Parse, StatementsCommentsAndIndices) {
  const Program p = parse_program(
      "# approach\n"
      "let gap = box_x - 0.5;  # inline\n"
      "if gap > max_step_height {\n"
      "  walk_to_position(gap, 0, 0, 0)\n"
      "} elif gap < 0 {\n"
      "  fail(\"too close\")\n"
      "} else {\n"
      "  stand_up(); sit_down()\n"
      "}\n"
      "recover()\n");
  ASSERT_EQ(p.statements.size(), 3u);
  EXPECT_EQ(count_statements(p), 7u);
  const auto& branch = std::get<If>(p.statements[1].node);
  ASSERT_EQ(branch.arms.size(), 2u);
  ASSERT_TRUE(branch.else_body.has_value());
  EXPECT_EQ(branch.arms[0].body[0].index, 2u);
  EXPECT_EQ(branch.arms[1].body[0].index, 3u);
  EXPECT_EQ((*branch.else_body)[1].index, 5u);
  EXPECT_EQ(p.statements[2].index, 6u);
  EXPECT_EQ(p.statements[1].pos.line, 3);
  EXPECT_EQ(std::get<SkillCall>(find_statement(p, 5)->node).name, "sit_down");
}

TEST(Parse, SyntaxErrorsCarryPosition) {
  try {
    parse_program("let a = 1\nif a < 2 < 3 { }\n");
    FAIL() << "chained comparison accepted";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.col(), 10);
    EXPECT_NE(e.expected().find("comparison"), std::string::npos);
  }
  try {
    parse_program("walk_to_position(1, 2\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.expected(), "',' or ')'");
  }
  EXPECT_THROW(parse_program("let = 3"), SyntaxError);
  EXPECT_THROW(parse_program("let if = 3"), SyntaxError);
  EXPECT_THROW(parse_program("if x { stand_up()"), SyntaxError);
  EXPECT_THROW(parse_program("stand_up"), SyntaxError);
  EXPECT_THROW(parse_program("fail(\"open"), SyntaxError);
  EXPECT_THROW(parse_program("let a = 1e999"), SyntaxError);
  EXPECT_THROW(parse_program("let a = b.w"), SyntaxError);
  EXPECT_THROW(parse_program("let a = 3 $ 4"), SyntaxError);
  EXPECT_THROW(parse_expression("1 2"), SyntaxError);
}

TEST(Print, CanonicalLayout) {
  const Program p = parse_program("if a>1{walk_to_position(1,2,0,0,box);}else{fail(\"say \\\"no\\\"\")}");
  EXPECT_EQ(print_program(p),
            "if a > 1 {\n"
            "  walk_to_position(1, 2, 0, 0, box)\n"
            "} else {\n"
            "  fail(\"say \\\"no\\\"\")\n"
            "}\n");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-7), "1e-07");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(RoundTrip, FuzzedProgramsReparseIdentically) {
  for (unsigned seed = 0; seed < 400; ++seed) {
    PlanFuzzer fuzz(seed);
    const Program p = fuzz.program();
    const std::string text = print_program(p);
    Program back;
    ASSERT_NO_THROW(back = parse_program(text)) << text;
    ASSERT_TRUE(equal(p, back)) << "seed " << seed << "\n" << text << "\n---\n" << print_program(back);
    EXPECT_EQ(print_program(back), text);
  }
}

TEST(RoundTrip, RandomTextTerminates) {
  // Arbitrary token soup either parses or raises SyntaxError; nothing else.
  const std::vector<std::string> pieces{"let", "if",  "elif", "else", "fail", "(",  ")",   "{",     "}",    ",",
                                        ";",   ".",   "x",    "+",    "-",    "*",  "/",   "<",     "<=",   "==",
                                        "=",   "not", "and",  "or",   "1.5",  "2e3", "a",  "\"s\"", "\n",   "#c\n",
                                        "!",   "!=",  "true", "stand_up", "\"", "3."};
  std::mt19937 rng(7);
  for (int i = 0; i < 3000; ++i) {
    std::string src;
    const int n = std::uniform_int_distribution<int>(0, 25)(rng);
    for (int k = 0; k < n; ++k) {
      src += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
      src += ' ';
    }
    try {
      const Program p = parse_program(src);
      EXPECT_TRUE(equal(p, parse_program(print_program(p)))) << src;
    } catch (const SyntaxError&) {
    }
  }
}

// --- evaluation --------------------------------------------------------------

TEST(Eval, ArithmeticAndBuiltins) {
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("1 + 2 * 3 - 4 / 2")), 5.0);
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("min(3, -2) + max(1, 4) + abs(-0.5)")), 2.5);
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("(vec3(1, 2, 3) * 2 - vec3(1, 1, 1)).z")), 5.0);
  EXPECT_TRUE(std::get<bool>(eval_text("not 1 > 2 and (true or false)")));
  EXPECT_FALSE(std::get<bool>(eval_text("1 == 2")));
  // and/or short-circuit past an ill-typed right side.
  EXPECT_FALSE(std::get<bool>(eval_text("false and 1")));
  EXPECT_TRUE(std::get<bool>(eval_text("true or 1")));
}

TEST(Eval, ErrorsAreTyped) {
  auto kind_of = [](const std::string& text) {
    try {
      eval_text(text);
    } catch (const RuntimeError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  const int type = static_cast<int>(RuntimeError::Kind::RuntimeTypeError);
  const int unknown = static_cast<int>(RuntimeError::Kind::UnknownIdentifier);
  EXPECT_EQ(kind_of("1 + true"), type);
  EXPECT_EQ(kind_of("1 / 0"), type);
  EXPECT_EQ(kind_of("vec3(1, 2, 3) < 2"), type);
  EXPECT_EQ(kind_of("(1).x"), type);
  EXPECT_EQ(kind_of("min(1)"), type);
  EXPECT_EQ(kind_of("nothing_here + 1"), unknown);
  EXPECT_EQ(kind_of("frobnicate(1)"), unknown);
}

TEST(Eval, PerceptionAndGlobals) {
  const Scene s = yard();
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("get_position(box).y", &s)), 1.0);
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("get_size(stairs).z", &s)), 0.4);
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("get_position(robot).x", &s)), -1.0);
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("stairs_step2_top_z", &s)), 0.4);
  EXPECT_DOUBLE_EQ(std::get<double>(eval_text("max_step_height", &s)), 0.35);
  EXPECT_THROW(eval_text("get_position(ghost)", &s), RuntimeError);
}

// --- interpretation ----------------------------------------------------------

TEST(Run, SequenceAndDispatchedArguments) {
  Scene s = yard();
  std::vector<SkillInvocation> calls;
  const Program p = parse_program(
      "let x = stairs_x - stairs_size_x / 2 - robot_length / 2 - 0.1\n"
      "walk_to_position(x, 0, robot_z, 0, box)\n"
      "wait_for_event(door_opened, 5)\n");
  s.events.insert("door_opened");
  add_object(s, make("bell", BellKind{"bell_rung", "door_opened", "", 1.0, 5.0}, {3, 3, 1}, {0.1, 0.1, 0.1}));
  const PlanResult r = run_plan(p, s, [&](const SkillInvocation& c, std::size_t) {
    calls.push_back(c);
    return true;
  });
  EXPECT_EQ(r.status, PlanStatus::Completed);
  ASSERT_EQ(calls.size(), 2u);
  EXPECT_DOUBLE_EQ(std::get<double>(calls[0].args[0]), 1.0 - 0.3 - 0.1);
  EXPECT_EQ(std::get<std::string>(calls[0].args[4]), "box");
  EXPECT_EQ(std::get<std::string>(calls[1].args[0]), "door_opened");
}

TEST(Run, StaticallyTrueConditionNeverRunsElse) {
  const Scene s = yard();
  std::vector<std::string> names;
  const Program p = parse_program("if true { stand_up() } else { sit_down() }\nif 1 > 2 { recover() }");
  run_plan(p, s, [&](const SkillInvocation& c, std::size_t) {
    names.push_back(c.name);
    return true;
  });
  EXPECT_EQ(names, std::vector<std::string>{"stand_up"});
}

TEST(Run, ConditionsSeeTheSceneAfterEarlierSkills) {
  Scene s = yard();
  const Program p = parse_program(
      "walk_to_position(0.5, -1, 0, 0)\n"
      "if robot_x > 0 { stand_up() } else { fail(\"did not move\") }\n");
  std::vector<std::string> names;
  const PlanResult r = run_plan(p, s, [&](const SkillInvocation& c, std::size_t) {
    names.push_back(c.name);
    invoke_skill(s, c, NoiseRegime::zero());
    return true;
  });
  EXPECT_EQ(r.status, PlanStatus::Completed);
  EXPECT_EQ(names, (std::vector<std::string>{"walk_to_position", "stand_up"}));
}

TEST(Run, StopAndFailReportLocation) {
  const Scene s = yard();
  const Program p = parse_program("stand_up()\nif true { fail(\"nothing to touch\") }\nsit_down()");
  const PlanResult r = run_plan(p, s, [](const SkillInvocation&, std::size_t) { return true; });
  EXPECT_EQ(r.status, PlanStatus::Unsolvable);
  EXPECT_EQ(r.location, 2u);
  EXPECT_EQ(r.message, "nothing to touch");
  EXPECT_EQ(r.skill_calls, 1u);

  const PlanResult stop = run_plan(p, s, [](const SkillInvocation&, std::size_t loc) { return loc != 0; });
  EXPECT_EQ(stop.status, PlanStatus::Stopped);
  EXPECT_EQ(stop.location, 0u);
}

TEST(Run, UnknownObjectArgumentIsUnknownIdentifier) {
  const Scene s = yard();
  const Program p = parse_program("push_to_position(ghost, 0, 0, 0)");
  try {
    run_plan(p, s, [](const SkillInvocation&, std::size_t) { return true; });
    FAIL();
  } catch (const RuntimeError& e) {
    EXPECT_EQ(e.kind(), RuntimeError::Kind::UnknownIdentifier);
  }
}

// --- validation ---------------------------------------------------------------

TEST(Validate, CleanPlanHasNoFaults) {
  const std::vector<Scene> scenes{yard()};
  const Program p = parse_program(
      "let front = stairs_x - stairs_size_x / 2 - robot_length / 2 - 0.1\n"
      "walk_to_position(front, 0, robot_z, 0)\n"
      "climb_to_position(stairs_x + stairs_size_x / 2 - robot_length / 2 - 0.02, 0, stairs_step2_top_z)\n"
      "stand_up()\n"
      "hand_touch_position(robot_x + 0.2, robot_y, robot_z + 0.6)\n"
      "sit_down()\n");
  EXPECT_TRUE(validate_plan(p).empty()) << rules(validate_plan(p));
  EXPECT_TRUE(validate_plan(p, scenes).empty()) << rules(validate_plan(p, scenes));
}

TEST(Validate, StanceMachine) {
  auto faults = validate_plan(parse_program("hand_touch_position(0, 0, 0.5)"));
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].rule, "bad-stance");
  EXPECT_EQ(faults[0].location, 0u);
  faults = validate_plan(parse_program("stand_up()\nwalk_to_position(0, 0, 0, 0)\nrecover()"));
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].location, 1u);
  EXPECT_EQ(faults[0].category, FaultCategory::Logical);
  EXPECT_FALSE(faults[0].heuristic);
  // One branch standing up is enough to allow the touch.
  EXPECT_TRUE(validate_plan(parse_program("if robot_x > 0 { stand_up() }\nhand_touch_position(0, 0, 0.5)")).empty());
}

TEST(Validate, GuardsOnTheSceneStateArePruned) {
  const std::vector<Scene> scenes{yard()};
  // The robot starts on all fours, so the guarded sit never runs.
  auto faults = validate_plan(parse_program("if robot_bipedal > 0.5 { sit_down() }\nwalk_to_position(0, 0, 0, 0)"),
                              scenes);
  EXPECT_TRUE(faults.empty()) << rules(faults);
  // Without a scene both arms are explored.
  faults = validate_plan(parse_program("if robot_bipedal > 0.5 { sit_down() }"));
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].rule, "bad-stance");
  // Initial values hold until the first skill runs.
  faults = validate_plan(parse_program("if robot_x > 0 { sit_down() }"), scenes);
  EXPECT_TRUE(faults.empty()) << rules(faults);
  faults = validate_plan(parse_program("recover()\nif robot_x > 0 { sit_down() }"), scenes);
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].location, 2u);
  // A limit-only elif behind a taken state guard is still dead code.
  faults = validate_plan(parse_program("if robot_x < 0 { recover() } elif max_step_height < 0 { recover() }"), scenes);
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].rule, "unreachable-branch");
}

TEST(Validate, UnreachableBranchesFromLimits) {
  const auto faults = validate_plan(parse_program(
      "if max_step_height > 1 { stand_up() } elif robot_x > 0 { recover() }\n"
      "if 0.1 < max_step_height { recover() } else { recover() }\n"));
  ASSERT_EQ(faults.size(), 2u) << rules(faults);
  EXPECT_EQ(faults[0].location, 0u);
  EXPECT_EQ(faults[1].location, 3u);
  for (const auto& f : faults) {
    EXPECT_EQ(f.rule, "unreachable-branch");
    EXPECT_FALSE(f.blocks_execution());
  }
}

TEST(Validate, FailOnEveryPath) {
  const auto faults = validate_plan(parse_program(
      "if robot_x > 0 { fail(\"a\") } else { recover()\nfail(\"b\") }"));
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].rule, "always-fails");
  EXPECT_TRUE(validate_plan(parse_program("if robot_x > 0 { fail(\"a\") }\nrecover()")).empty());
}

TEST(Validate, HeuristicFaultsBlock) {
  const std::vector<Scene> scenes{yard()};
  const std::vector<std::pair<std::string, std::string>> cases{
      {"jump_to_position(1, 2, 3)", "unknown-skill"},
      {"stand_up(1)", "arity"},
      {"walk_to_position(1, 2, 0, true)", "arg-type"},
      {"push_to_position(1, 2, 0, 0)", "arg-type"},
      {"walk_to_position(bogus_x, 0, 0, 0)", "unknown-identifier"},
      {"push_to_position(ghost, 0, 0, 0)", "unknown-identifier"},
      {"walk_to_position(1 / 0, 0, 0, 0)", "division-by-zero"},
      {"if 1 + 2 { recover() }", "type-mismatch"},
      {"let v = get_position(box) + 1", "type-mismatch"},
      {"let v = distance(box)", "unknown-function"},
  };
  for (const auto& [src, rule] : cases) {
    const auto faults = validate_plan(parse_program(src), scenes);
    ASSERT_EQ(faults.size(), 1u) << src << " -> " << rules(faults);
    EXPECT_EQ(faults[0].rule, rule) << src;
    EXPECT_EQ(faults[0].category, FaultCategory::Logical);
    EXPECT_TRUE(faults[0].heuristic);
    EXPECT_TRUE(faults[0].blocks_execution());
  }
}

TEST(Validate, ConstantArgumentsAgainstLimits) {
  auto single = [](const std::string& src) {
    const auto faults = validate_plan(parse_program(src));
    EXPECT_EQ(faults.size(), 1u) << src << " -> " << rules(faults);
    return faults.empty() ? PlanFault{} : faults[0];
  };
  EXPECT_EQ(single("climb_to_position(1, 0, 0.5)").rule, "climb-rise-constant");
  EXPECT_EQ(single("climb_to_position(1, 0, 0.5)").category, FaultCategory::ConstraintViolation);
  EXPECT_EQ(single("stand_up()\nhand_touch_position(0, 0, 1.2)").rule, "touch-height-constant");
  EXPECT_EQ(single("wait_for_event(door_opened, 0)").rule, "nonpositive-timeout");
  EXPECT_TRUE(validate_plan(parse_program("climb_to_position(1, 0, 0.3)")).empty());
}

TEST(Validate, DryRunCategories) {
  const std::vector<Scene> scenes{yard()};
  struct Case {
    std::string src;
    FaultCategory category;
    std::string rule;
  };
  const std::vector<Case> cases{
      {"walk_to_position(stairs_x, 0, 0, 0)", FaultCategory::Spatial, "target-inside-object"},
      {"walk_to_position(20, 0, 0, 0)", FaultCategory::Spatial, "no-path"},
      {"climb_to_position(1.3, 0, 0.3)", FaultCategory::Spatial, "bad-target"},
      {"push_to_position(box, stairs_x, 0, 0)", FaultCategory::Spatial, "push-target-overlap"},
      {"push_to_position(crate, 0, -1.5, 0)", FaultCategory::ConstraintViolation, "unpushable"},
      {"walk_to_position(0.4, 0, 0, 0)\nclimb_to_position(2.1, 0, stairs_step2_top_z)\npush_to_position(box, 0, 0.5, 0)",
       FaultCategory::Logical, "push-level"},
      {"walk_to_position(0.4, 0, 0, 0)\nstand_up()\nhand_touch_position(0.4, 2, 0.4)", FaultCategory::ConstraintViolation,
       "out-of-reach"},
  };
  for (const auto& c : cases) {
    const auto faults = validate_plan(parse_program(c.src), scenes);
    ASSERT_EQ(faults.size(), 1u) << c.src << " -> " << rules(faults);
    EXPECT_EQ(faults[0].category, c.category) << c.src;
    EXPECT_EQ(faults[0].rule, c.rule) << c.src;
    EXPECT_FALSE(faults[0].heuristic);
  }
}

TEST(Validate, StepTooHighNeedsTheScene) {
  Scene tall = yard();
  tall.objects.erase("stairs");
  add_object(tall, make("stairs", StairsKind{{0.42, 0.2}, 0.7}, {1.7, 0, 0}, {1.4, 1.2, 0.62}));
  const Program p = parse_program(
      "walk_to_position(0.6, 0, 0, 0)\n"
      "climb_to_position(2.1, 0, stairs_step2_top_z)\n");
  EXPECT_TRUE(validate_plan(p, {yard()}).empty());
  const auto faults = validate_plan(p, {yard(), tall});
  ASSERT_EQ(faults.size(), 1u) << rules(faults);
  EXPECT_EQ(faults[0].category, FaultCategory::ConstraintViolation);
  EXPECT_EQ(faults[0].rule, "step-too-high");
  EXPECT_EQ(faults[0].location, 1u);
}

TEST(Validate, DryRunDoesNotTouchTheScene) {
  const Scene s = yard();
  const Scene before = s;
  check_in_scene(parse_program("walk_to_position(0.4, 0, 0, 0)\nstand_up()"), s);
  EXPECT_EQ(s, before);
}
