#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes data/plans/planted/*.plan and data/plans/manifest.json.

Every planted plan is a golden plan with one fault introduced. The expected
location is the pre-order index of the first statement containing `at`.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
PLANS = ROOT / "data" / "plans"
SEEDS = list(range(10))

S, CV, L = "Spatial", "ConstraintViolation", "Logical"

# (task, slug, category, [(old, new)...], at)
MUTATIONS = [
    # light
    ("light", "touch_without_stand", L, [("stand_up()\n", "")], "hand_touch_position"),
    ("light", "stand_before_climb", L,
     [("climb_to_position(", "stand_up()\nclimb_to_position(")],
     "climb_to_position"),
    ("light", "sit_before_touch", L,
     [("stand_up()\nhand_touch_position(button_x, button_y, button_z + button_size_z / 2)\nsit_down()\n",
       "stand_up()\nsit_down()\nhand_touch_position(button_x, button_y, button_z + button_size_z / 2)\n")],
     "hand_touch_position"),
    ("light", "ends_in_fail", L, [("sit_down()\n", "sit_down()\nfail(\"done\")\n")], "fail(\"done\")"),
    ("light", "dead_sit_branch", L, [("sit_down()\n", "if robot_length < 0 {\n  sit_down()\n}\n")],
     "if robot_length"),
    ("light", "misspelled_global", L, [("walk_to_position(front - 1.1, button_y", "walk_to_position(front - 1.1, buton_y")],
     "walk_to_position"),
    ("light", "numeric_condition", L, [("if box_mass > push_mass_limit", "if box_mass + push_mass_limit")], "if box_mass"),
    ("light", "push_from_top_step", L,
     [("sit_down()\n", "sit_down()\npush_to_position(box, front - 1.5, button_y, 0)\n")], "push_to_position(box, front - 1.5"),
    ("light", "sit_with_argument", L, [("sit_down()", "sit_down(1)")], "sit_down"),
    ("light", "unknown_skill", L, [("hand_touch_position(", "press_button(")], "press_button"),
    ("light", "walk_into_wall", S, [("walk_to_position(front - 1.1, button_y", "walk_to_position(wall_x, button_y")],
     "walk_to_position"),
    ("light", "box_into_stairs", S, [("push_to_position(box, front - box_size_x / 2 - 0.01", "push_to_position(box, stairs_x")],
     "push_to_position"),
    ("light", "box_into_wall", S, [("push_to_position(box, front - box_size_x / 2 - 0.01", "push_to_position(box, wall_x")],
     "push_to_position"),
    ("light", "climb_into_wall", S, [("climb_to_position(button_x - robot_length / 2 - 0.02", "climb_to_position(button_x + 0.1")],
     "climb_to_position"),
    ("light", "no_box", CV,
     [("if stairs_step1_height > max_step_height {\n"
       "  # First rise too high: push the box in front of the stairs as an extra step.\n"
       "  if box_mass > push_mass_limit {\n"
       "    fail(\"the box is too heavy to push\")\n"
       "  }\n"
       "  push_to_position(box, front - box_size_x / 2 - 0.01, button_y, 0)\n"
       "}\n", "")],
     "climb_to_position"),
    ("light", "box_off_the_line", CV,
     [("push_to_position(box, front - box_size_x / 2 - 0.01, button_y, 0)",
       "push_to_position(box, front - box_size_x / 2 - 0.01, button_y + 1.2, 0)")],
     "climb_to_position"),
    ("light", "touch_too_high", CV, [("button_z + button_size_z / 2)", "button_z + 1.0)")], "hand_touch_position"),
    ("light", "climb_wrong_height", S, [("button_y, stairs_top_z)", "button_y, 0.9)")], "climb_to_position"),
    # delivery
    ("delivery", "zero_timeout", CV, [("door_opened, 30", "door_opened, 0")], "wait_for_event"),
    ("delivery", "bell_too_high", CV, [("bell_z + bell_size_z / 2)", "bell_z + 1.2)")], "hand_touch_position"),
    ("delivery", "bell_constant_height", CV, [("bell_z + bell_size_z / 2)", "1.5)")], "hand_touch_position"),
    ("delivery", "push_while_standing", L, [("  sit_down()\n", "")], "push_to_position(package, door_x"),
    ("delivery", "touch_without_stand", L, [("  stand_up()\n", "")], "hand_touch_position"),
    ("delivery", "unknown_event", L, [("door_opened, 30", "door_open_event, 30")], "wait_for_event"),
    ("delivery", "unknown_object", L, [("push_to_position(package, door_x", "push_to_position(parcel, door_x")],
     "push_to_position(parcel"),
    ("delivery", "boolean_timeout", L, [("door_opened, 30", "door_opened, door_open < 30")], "wait_for_event"),
    ("delivery", "dead_elif", L, [("  wait_for_event(door_opened, 30)\n}\n",
                                   "  wait_for_event(door_opened, 30)\n} elif robot_length < 0 {\n  sit_down()\n}\n")],
     "if door_open"),
    ("delivery", "gives_up", L, [("push_to_position(package, spot_x, spot_y, 0)", "fail(\"cannot reach the spot\")")],
     "fail("),
    ("delivery", "division_by_zero", L, [("door_x - 1.0", "door_x / 0")], "push_to_position(package, door_x"),
    ("delivery", "package_into_wall", S, [("push_to_position(package, door_x - 1.0, door_y, 0)",
                                           "push_to_position(package, door_x, door_y + 0.8, 0)")],
     "push_to_position(package, door_x"),
    ("delivery", "walk_into_wall", S, [("walk_to_position(bell_x - robot_length / 2 - 0.03, bell_y",
                                        "walk_to_position(door_x, door_y + 1.0")], "walk_to_position"),
    ("delivery", "door_never_opened", S,
     [("if door_open < 0.5 {\n"
       "  walk_to_position(bell_x - robot_length / 2 - 0.03, bell_y, robot_z, 0, package)\n"
       "  stand_up()\n"
       "  hand_touch_position(bell_x, bell_y, bell_z + bell_size_z / 2)\n"
       "  sit_down()\n"
       "  wait_for_event(door_opened, 30)\n"
       "}\n", "")],
     "push_to_position(package, spot_x"),
    ("delivery", "package_onto_package_spot_in_wall", S,
     [("push_to_position(package, spot_x, spot_y, 0)", "push_to_position(package, door_x, spot_y + 0.9, 0)")],
     "push_to_position(package, door_x, spot_y"),
    # bridge
    ("bridge", "box_into_platform", S, [("push_to_position(box, gap_x, gap_y, 0)", "push_to_position(box, platform_x, platform_y, 0)")],
     "push_to_position"),
    ("bridge", "box_into_stairs", S, [("push_to_position(box, gap_x, gap_y, 0)", "push_to_position(box, stairs_x, stairs_y, 0)")],
     "push_to_position"),
    ("bridge", "walk_into_stairs", S, [("walk_to_position(stairs_x - stairs_size_x / 2 - 0.4", "walk_to_position(stairs_x")],
     "walk_to_position"),
    ("bridge", "walk_under_platform", S, [("walk_to_position(stairs_x - stairs_size_x / 2 - 0.4, stairs_y",
                                           "walk_to_position(platform_x, platform_y")], "walk_to_position"),
    ("bridge", "no_bridge", CV, [("push_to_position(box, gap_x, gap_y, 0)\n", "")], "climb_to_position"),
    ("bridge", "climb_wrong_height", S, [("platform_y, platform_top_z)", "platform_y, 1.0)")], "climb_to_position"),
    ("bridge", "always_too_heavy", L, [("if box_mass > push_mass_limit", "if push_mass_limit > 0")], "fail("),
    ("bridge", "push_from_platform", L, [("climb_to_position(platform_x, platform_y, platform_top_z)\n",
                                          "climb_to_position(platform_x, platform_y, platform_top_z)\n"
                                          "push_to_position(box, gap_x, gap_y + 1.0, 0)\n")],
     "push_to_position(box, gap_x, gap_y + 1.0"),
    ("bridge", "stand_before_walk", L, [("walk_to_position(", "stand_up()\nwalk_to_position(")], "walk_to_position"),
    ("bridge", "misspelled_global", L, [("gap_x, gap_y", "gap_center_x, gap_y")], "push_to_position"),
    ("bridge", "division_by_zero", L, [("gap_x, gap_y, 0", "gap_x, gap_y / 0, 0")], "push_to_position"),
    ("bridge", "walk_missing_args", L, [("walk_to_position(stairs_x - stairs_size_x / 2 - 0.4, stairs_y, robot_z, 0)",
                                         "walk_to_position(stairs_x, stairs_y)")], "walk_to_position"),
    ("bridge", "numeric_condition", L, [("if box_mass > push_mass_limit", "if box_mass")], "if box_mass"),
    # elevator
    ("elevator", "negative_timeout", CV, [("elevator_arrived, 60", "elevator_arrived, -1")], "wait_for_event(elevator"),
    ("elevator", "zero_floor_timeout", CV, [("floor_reached, 60", "floor_reached, 0")], "wait_for_event(floor"),
    ("elevator", "panel_too_high", CV, [("panel_z + (target_floor - 0.5) * panel_button_spacing", "panel_z + 1.0")],
     "hand_touch_position(panel_x"),
    ("elevator", "panel_constant_height", CV, [("panel_z + (target_floor - 0.5) * panel_button_spacing", "2.0")],
     "hand_touch_position(panel_x"),
    ("elevator", "panel_without_stand", L, [("0)\nstand_up()\nhand_touch_position(panel_x", "0)\nhand_touch_position(panel_x")],
     "hand_touch_position(panel_x"),
    ("elevator", "never_sits", L, [("  sit_down()\n", "")], "walk_to_position(panel_x"),
    ("elevator", "unknown_event", L, [("floor_reached, 60", "floor_arrived, 60")], "wait_for_event(floor"),
    ("elevator", "dead_down_call", L, [("elif target_floor < robot_floor", "elif robot_length < 0")], "if target_floor"),
    ("elevator", "object_as_height", L, [("panel_z + (target_floor - 0.5) * panel_button_spacing", "panel")],
     "hand_touch_position(panel_x"),
    ("elevator", "unknown_skill", L, [("hand_touch_position(panel_x", "press_panel(panel_x")], "press_panel"),
    ("elevator", "walk_into_up_wall", S, [("walk_to_position(call_up_x - robot_length / 2 - 0.03",
                                           "walk_to_position(call_up_x + 0.15")], "walk_to_position(call_up_x"),
    ("elevator", "walk_into_down_wall", S, [("walk_to_position(call_down_x - robot_length / 2 - 0.03",
                                             "walk_to_position(call_down_x + 0.15")], "walk_to_position(call_down_x"),
    ("elevator", "walk_into_cabin_back", S, [("walk_to_position(panel_x - robot_length / 2 - 0.03",
                                              "walk_to_position(panel_x + 0.3")], "walk_to_position(panel_x"),
]


def statement_lines(source):
    out = []
    for line in source.splitlines():
        s = line.strip()
        if not s or s.startswith("#") or s.startswith("}"):
            continue
        out.append(s)
    return out


def location(source, marker):
    for i, s in enumerate(statement_lines(source)):
        if marker in s:
            return i
    raise SystemExit(f"marker {marker!r} not found")


def main():
    planted = PLANS / "planted"
    planted.mkdir(parents=True, exist_ok=True)
    for old in planted.glob("*.plan"):
        old.unlink()
    entries = []
    for task in ("light", "delivery", "bridge", "elevator"):
        entries.append({"file": f"golden/{task}.plan", "group": "golden", "task": task, "seeds": SEEDS,
                        "expected": []})
    # Replan plans also run mid-trajectory, so they are checked against a
    # mid-run state as well.
    entries.append({"file": "replan/light_touch_failure.plan", "group": "replan", "task": "light", "seeds": SEEDS,
                    "scenes": ["../scenes/light_on_top_step.json"], "expected": []})
    entries.append({"file": "replan/delivery_interruption.plan", "group": "replan", "task": "delivery",
                    "seeds": SEEDS, "scenes": ["../scenes/delivery_standing_at_bell.json"], "expected": []})
    counters = {}
    for task, slug, category, edits, at in MUTATIONS:
        source = (PLANS / "golden" / f"{task}.plan").read_text()
        for old, new in edits:
            if old not in source:
                raise SystemExit(f"{task}/{slug}: {old!r} not in golden plan")
            source = source.replace(old, new, 1)
        counters[task] = counters.get(task, 0) + 1
        name = f"planted/{task}_{counters[task]:02d}_{slug}.plan"
        (PLANS / name).write_text(source)
        entries.append({"file": name, "group": "planted", "task": task, "seeds": SEEDS,
                        "expected": [{"category": category, "location": location(source, at)}]})
    (PLANS / "manifest.json").write_text(json.dumps({"plans": entries}, indent=2) + "\n")
    print(f"{len(entries)} plans, {len(MUTATIONS)} planted")


if __name__ == "__main__":
    main()
