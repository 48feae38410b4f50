#!/usr/bin/env python3
# Copyright 2026 The cuaeval Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Generates the bundled sample corpus, sim app definitions and fixtures.

Outcomes of every scripted attempt are recomputed here with a small
independent simulator, and the script refuses to write fixtures whose
outcome counts drift from the intended mix.
"""

import argparse
import json
import pathlib

SCREEN_W, SCREEN_H, DOCK_H = 1280, 800, 48
BTN_W, BTN_H = 160, 40

APPS = [
    ("appstore", "App Store", "utilities"),
    ("calendar", "Calendar", "productivity"),
    ("settings", "System Settings", "system"),
]

# (region, field, value[, when]) buttons laid out on a grid per app.
BUTTONS = {
    "settings": [
        ("wifi_on", "wifi", "on"), ("wifi_off", "wifi", "off"),
        ("bt_on", "bluetooth", "on"), ("bt_off", "bluetooth", "off"),
        ("theme_light", "theme", "light"), ("theme_dark", "theme", "dark"),
        ("vol_low", "volume", "low"), ("vol_medium", "volume", "medium"),
        ("vol_high", "volume", "high"), ("night_on", "night_shift", "on"),
        ("night_off", "night_shift", "off"),
    ],
    "calendar": [
        ("view_month", "view", "month"), ("view_week", "view", "week"),
        ("view_day", "view", "day"), ("day_mon", "draft_day", "mon"),
        ("day_tue", "draft_day", "tue"), ("day_wed", "draft_day", "wed"),
        ("day_fri", "draft_day", "fri"), ("reminder_on", "reminder", "on"),
        ("reminder_off", "reminder", "off"), ("color_green", "color", "green"),
        ("color_red", "color", "red"), ("save", "saved", "yes", {"reminder": "on"}),
    ],
    "appstore": [
        ("tab_discover", "tab", "discover"), ("tab_updates", "tab", "updates"),
        ("install_notes", "notes", "installed", {"tab": "discover"}),
        ("install_maps", "maps", "installed", {"tab": "discover"}),
        ("update_all", "updates", "done", {"tab": "updates"}),
        ("auto_on", "auto_update", "on"), ("auto_off", "auto_update", "off"),
    ],
}

FIELDS = {
    "settings": {"wifi": ["on", "off"], "bluetooth": ["on", "off"],
                 "theme": ["light", "dark"], "volume": ["low", "medium", "high"],
                 "night_shift": ["on", "off"], "device_name": "text"},
    "calendar": {"view": ["month", "week", "day"],
                 "draft_day": ["none", "mon", "tue", "wed", "fri"],
                 "reminder": ["off", "on"], "color": ["blue", "green", "red"],
                 "saved": ["no", "yes"], "draft_title": "text"},
    "appstore": {"tab": ["discover", "updates"], "notes": ["available", "installed"],
                 "maps": ["available", "installed"], "updates": ["pending", "done"],
                 "auto_update": ["off", "on"], "search": "text"},
}

INITIAL = {
    "settings": {"wifi": "on", "bluetooth": "off", "theme": "light", "volume": "medium",
                 "night_shift": "off", "device_name": "MacBook"},
    "calendar": {"view": "month", "draft_day": "none", "reminder": "off", "color": "blue",
                 "saved": "no", "draft_title": ""},
    "appstore": {"tab": "updates", "notes": "available", "maps": "available",
                 "updates": "pending", "auto_update": "off", "search": ""},
}

TEXT_FIELD = {"settings": "device_name", "calendar": "draft_title", "appstore": "search"}


def region_rect(app, name):
    for i, b in enumerate(BUTTONS[app]):
        if b[0] == name:
            col, row = i % 4, i // 4
            return 40 + col * 200, 80 + row * 64, BTN_W, BTN_H
    if name == "text_box":
        return 40, 600, 600, 40
    raise KeyError(name)


def dock_slot(app):
    ids = sorted(a[0] for a in APPS)
    x = 16 + ids.index(app) * (96 + 8)
    return x, SCREEN_H - DOCK_H + 4, 96, DOCK_H - 8


def app_def(app):
    regions = [{"name": b[0], **dict(zip("xywh", region_rect(app, b[0])))}
               for b in BUTTONS[app]]
    regions.append({"name": "text_box", **dict(zip("xywh", region_rect(app, "text_box")))})
    transitions = []
    for b in BUTTONS[app]:
        t = {"trigger": {"type": "click", "region": b[0]}, "set": {b[1]: b[2]}}
        if len(b) > 3:
            t["when"] = b[3]
        transitions.append(t)
    transitions.append({"trigger": {"type": "type_text", "pattern": "*"},
                        "set": {TEXT_FIELD[app]: "$text"}})
    transitions.append({"trigger": {"type": "key_press", "keys": ["cmd", "z"]},
                        "set": dict(INITIAL[app])})
    return {"app_id": app, "display_name": dict((a[0], a[1]) for a in APPS)[app],
            "state_fields": FIELDS[app], "initial_state": INITIAL[app],
            "regions": regions, "transitions": transitions}


# Actions: ("click", region) | ("type", text) | ("dock", app) | ("wait",)
# Atoms: (app, field, value) | ("focused", app); a leading "!" negates.
TASKS = [
    # settings
    ("settings-wifi-off", "Turn Wi-Fi off.", [("settings", "wifi", "off")],
     [("click", "wifi_off")], [("click", "bt_on")]),
    ("settings-bluetooth-on", "Turn Bluetooth on.", [("settings", "bluetooth", "on")],
     [("click", "bt_on")], [("click", "wifi_off")]),
    ("settings-dark-theme", "Switch the appearance to dark mode.",
     [("settings", "theme", "dark")], [("click", "theme_dark")], [("click", "night_on")]),
    ("settings-volume-high", "Set the output volume to high.",
     [("settings", "volume", "high")], [("click", "vol_high")], [("click", "vol_low")]),
    ("settings-night-shift", "Enable Night Shift.", [("settings", "night_shift", "on")],
     [("click", "night_on")], [("click", "theme_dark")]),
    ("settings-rename-device", "Rename this computer to Studio Mac.",
     [("settings", "device_name", "Studio Mac")],
     [("click", "text_box"), ("type", "Studio Mac")], [("type", "Studio")]),
    ("settings-volume-low-keep-wifi", "Lower the volume to low without disabling Wi-Fi.",
     [("settings", "volume", "low"), ("!settings", "wifi", "off")],
     [("click", "vol_low")], [("click", "vol_low"), ("click", "wifi_off")]),
    ("settings-airplane", "Turn off both Wi-Fi and Bluetooth.",
     [("settings", "wifi", "off"), ("settings", "bluetooth", "off")],
     [("click", "wifi_off"), ("click", "bt_off")], [("click", "bt_on"), ("click", "wifi_off")]),
    ("settings-evening", "Use dark mode and turn on Night Shift.",
     [("settings", "theme", "dark"), ("settings", "night_shift", "on")],
     [("click", "theme_dark"), ("click", "night_on")], [("click", "theme_dark")]),
    ("settings-quiet-dark", "Set volume to low, keep Bluetooth off and switch to dark mode.",
     [("settings", "volume", "low"), ("settings", "bluetooth", "off"),
      ("settings", "theme", "dark")],
     [("click", "vol_low"), ("click", "theme_dark")], [("click", "vol_low"), ("wait",)]),
    # calendar
    ("calendar-week-view", "Switch the calendar to week view.",
     [("calendar", "view", "week")], [("click", "view_week")], [("click", "view_day")]),
    ("calendar-day-view", "Show the day view.", [("calendar", "view", "day")],
     [("click", "view_day")], [("click", "view_week")]),
    ("calendar-green", "Change the calendar color to green.",
     [("calendar", "color", "green")], [("click", "color_green")], [("click", "color_red")]),
    ("calendar-reminder", "Turn on the event reminder.", [("calendar", "reminder", "on")],
     [("click", "reminder_on")], [("click", "save")]),
    ("calendar-title", "Title the draft event Team sync.",
     [("calendar", "draft_title", "Team sync")],
     [("click", "text_box"), ("type", "Team sync")], [("type", "Team")]),
    ("calendar-monday", "Schedule the draft event on Monday.",
     [("calendar", "draft_day", "mon")], [("click", "day_mon")], [("click", "day_tue")]),
    ("calendar-friday-red", "Put the draft on Friday and color it red.",
     [("calendar", "draft_day", "fri"), ("calendar", "color", "red")],
     [("click", "day_fri"), ("click", "color_red")], [("click", "day_fri")]),
    ("calendar-save-reminder", "Save the draft event with a reminder.",
     [("calendar", "saved", "yes"), ("calendar", "reminder", "on")],
     [("click", "reminder_on"), ("click", "save")], [("click", "save"), ("click", "reminder_on")]),
    ("calendar-wednesday-week", "Plan the event for Wednesday in week view.",
     [("calendar", "draft_day", "wed"), ("calendar", "view", "week")],
     [("click", "day_wed"), ("click", "view_week")], [("click", "day_wed"), ("click", "view_day")]),
    ("calendar-open-settings", "Leave the calendar and bring System Settings to the front.",
     [("focused", "settings")], [("dock", "settings")], [("dock", "appstore")]),
    # appstore
    ("appstore-discover", "Open the Discover tab.", [("appstore", "tab", "discover")],
     [("click", "tab_discover")], [("wait",)]),
    ("appstore-install-notes", "Install the Notes app.", [("appstore", "notes", "installed")],
     [("click", "tab_discover"), ("click", "install_notes")], [("click", "install_notes")]),
    ("appstore-install-maps", "Install the Maps app.", [("appstore", "maps", "installed")],
     [("click", "tab_discover"), ("click", "install_maps")],
     [("click", "tab_discover"), ("click", "install_notes")]),
    ("appstore-update-all", "Apply all pending updates.", [("appstore", "updates", "done")],
     [("click", "update_all")], [("click", "tab_discover"), ("click", "update_all")]),
    ("appstore-auto-update", "Enable automatic updates.", [("appstore", "auto_update", "on")],
     [("click", "auto_on")], [("click", "auto_off")]),
    ("appstore-search-weather", "Search the store for weather.",
     [("appstore", "search", "weather")], [("click", "text_box"), ("type", "weather")],
     [("type", "whether")]),
    ("appstore-updates-then-auto", "Apply pending updates and turn on automatic updates.",
     [("appstore", "updates", "done"), ("appstore", "auto_update", "on")],
     [("click", "update_all"), ("click", "auto_on")], [("click", "auto_on")]),
    ("appstore-notes-and-maps", "Install both Notes and Maps.",
     [("appstore", "notes", "installed"), ("appstore", "maps", "installed")],
     [("click", "tab_discover"), ("click", "install_notes"), ("click", "install_maps")],
     [("click", "tab_discover"), ("click", "install_maps")]),
    ("appstore-maps-no-auto", "Install Maps while leaving automatic updates off.",
     [("appstore", "maps", "installed"), ("!appstore", "auto_update", "on")],
     [("click", "tab_discover"), ("click", "install_maps")],
     [("click", "auto_on"), ("click", "tab_discover"), ("click", "install_maps")]),
    ("appstore-open-calendar", "Switch from the App Store to the Calendar.",
     [("focused", "calendar")], [("dock", "calendar")], [("click", "tab_discover")]),
]

# Outcome class per task for the flaky agent: S succeeds at attempt 0,
# F only once feedback arrives, X never.
FLAKY_CLASS = {
    "settings-wifi-off": "S", "settings-bluetooth-on": "F", "settings-dark-theme": "S",
    "settings-volume-high": "X", "settings-night-shift": "S", "settings-rename-device": "F",
    "settings-volume-low-keep-wifi": "X", "settings-airplane": "S", "settings-evening": "F",
    "settings-quiet-dark": "X",
    "calendar-week-view": "S", "calendar-day-view": "F", "calendar-green": "X",
    "calendar-reminder": "S", "calendar-title": "X", "calendar-monday": "F",
    "calendar-friday-red": "S", "calendar-save-reminder": "F", "calendar-wednesday-week": "X",
    "calendar-open-settings": "S",
    "appstore-discover": "S", "appstore-install-notes": "F", "appstore-install-maps": "X",
    "appstore-update-all": "S", "appstore-auto-update": "F", "appstore-search-weather": "X",
    "appstore-updates-then-auto": "S", "appstore-notes-and-maps": "F",
    "appstore-maps-no-auto": "X", "appstore-open-calendar": "S",
}


def predicate_text(atoms):
    parts = []
    for a in atoms:
        neg = a[0].startswith("!")
        app = a[0].lstrip("!")
        if app == "focused":
            s = f"focused == {a[1]}"
        else:
            v = a[2]
            value = v if all(c.isalnum() or c in "_-" for c in v) and v else json.dumps(v)
            s = f"{app}.{a[1]} == {value}"
        parts.append(f"!({s})" if neg else s)
    return " && ".join(parts)


def center(rect):
    x, y, w, h = rect
    return x + w // 2, y + h // 2


def to_action(app, a):
    if a[0] == "click":
        x, y = center(region_rect(app, a[1]))
        return {"type": "click", "x": x, "y": y}
    if a[0] == "dock":
        x, y = center(dock_slot(a[1]))
        return {"type": "click", "x": x, "y": y}
    if a[0] == "type":
        return {"type": "type_text", "text": a[1]}
    return {"type": "wait", "millis": 100}


# Independent reference simulator for the fixture outcomes.
DEFS = {a[0]: app_def(a[0]) for a in APPS}


def initial_state(app):
    return {"focused": app, "apps": {k: dict(INITIAL[k]) for k in INITIAL}}


def step(state, action):
    if action["type"] == "wait":
        return state
    if action["type"] == "click":
        x, y = action["x"], action["y"]
        for other in INITIAL:
            dx, dy, dw, dh = dock_slot(other)
            if dx <= x < dx + dw and dy <= y < dy + dh:
                return {**state, "focused": other}
    d = DEFS[state["focused"]]
    fields = state["apps"][state["focused"]]
    for t in d["transitions"]:
        trig = t["trigger"]
        if action["type"] == "click" and trig["type"] == "click":
            r = next(r for r in d["regions"] if r["name"] == trig["region"])
            hit = r["x"] <= action["x"] < r["x"] + r["w"] and r["y"] <= action["y"] < r["y"] + r["h"]
        elif action["type"] == "type_text" and trig["type"] == "type_text":
            hit = trig["pattern"] in ("*", action["text"])
        else:
            hit = False
        if not hit or any(fields.get(k) != v for k, v in t.get("when", {}).items()):
            continue
        new_fields = dict(fields)
        for k, v in t["set"].items():
            new_fields[k] = action["text"] if v == "$text" else v
        apps = dict(state["apps"])
        apps[state["focused"]] = new_fields
        return {"focused": t.get("focus", state["focused"]), "apps": apps}
    return state


def holds(state, atoms):
    for a in atoms:
        neg = a[0].startswith("!")
        app = a[0].lstrip("!")
        v = state["focused"] == a[1] if app == "focused" else state["apps"][app][a[1]] == a[2]
        if v == neg:
            return False
    return True


def script(app, actions, reasoning):
    out = [{"act": to_action(app, a), "reasoning": f"step {i + 1}: {a[0]} {a[1] if len(a) > 1 else ''}".rstrip()}
           for i, a in enumerate(actions)]
    out.append({"declare_done": True, "reasoning": reasoning})
    return out


def app_of(task_id):
    return task_id.split("-")[0]


def simulate(task, attempts):
    """attempts: list of action lists, run back to back from one reset."""
    app = app_of(task[0])
    st = initial_state(app)
    out = []
    for acts in attempts:
        for a in acts:
            st = step(st, to_action(app, a))
        out.append(holds(st, task[2]))
    return out


def build(root):
    data = root / "data"
    corpus = data / "sample_corpus"
    sim_apps = data / "sim_apps"
    agents = root / "fixtures" / "agents"
    configs = root / "fixtures" / "configs"
    for d in (corpus, sim_apps, agents, configs):
        d.mkdir(parents=True, exist_ok=True)

    with open(corpus / "apps.jsonl", "w") as f:
        for app_id, name, cat in APPS:
            f.write(json.dumps({"app_id": app_id, "display_name": name, "category": cat}) + "\n")
    with open(corpus / "tasks.jsonl", "w") as f:
        for t in TASKS:
            f.write(json.dumps({
                "task_id": t[0], "app_id": app_of(t[0]), "description": t[1],
                "complexity": "multi_step" if len(t[2]) > 1 else "simple",
                "goal_predicate": predicate_text(t[2])}) + "\n")
    for app_id, _, _ in APPS:
        (sim_apps / f"{app_id}.json").write_text(json.dumps(DEFS[app_id], indent=2) + "\n")

    for t in TASKS:
        assert not holds(initial_state(app_of(t[0])), t[2]), t[0]

    flaky = {"agent_id": "flaky-agent", "tasks": {}}
    counts = {"S": 0, "F": 0, "X": 0}
    for t in TASKS:
        app, cls = app_of(t[0]), FLAKY_CLASS[t[0]]
        entry = {}
        if cls == "S":
            entry["base_script"] = script(app, t[3], "The requested change is visible.")
            outcome = simulate(t, [t[3]])
            assert outcome == [True], t[0]
        elif cls == "F":
            entry["base_script"] = script(app, t[4], "I believe the task is complete.")
            entry["feedback_script"] = script(app, t[3], "Corrected after feedback.")
            outcome = simulate(t, [t[4], t[3]])
            assert outcome == [False, True], (t[0], outcome)
        else:
            entry["base_script"] = script(app, t[4], "Looks finished to me.")
            outcome = simulate(t, [t[4], t[4]])
            assert outcome == [False, False], (t[0], outcome)
        counts[cls] += 1
        flaky["tasks"][t[0]] = entry
    assert counts == {"S": 12, "F": 9, "X": 9}, counts
    (agents / "flaky.json").write_text(json.dumps(flaky, indent=2) + "\n")

    # Feedback-blind agent: solves every third task, otherwise repeats its
    # wrong script; a few tasks have no script and give up immediately.
    scripted = {"agent_id": "scripted-agent", "tasks": {}}
    for i, t in enumerate(TASKS):
        app = app_of(t[0])
        if i % 3 == 0:
            scripted["tasks"][t[0]] = {"base_script": script(app, t[3], "Done.")}
        elif i % 5 == 1:
            continue
        else:
            scripted["tasks"][t[0]] = {"base_script": script(app, t[4], "Done.")}
    (agents / "scripted.json").write_text(json.dumps(scripted, indent=2) + "\n")

    base = {"corpus": "../../data/sample_corpus", "sim_apps": "../../data/sim_apps",
            "store": "../../store", "seed": 7, "max_retries": 1, "step_budget": 10,
            "parallelism": 1, "judge": {"kind": "oracle"}}
    cfgs = {
        "flaky_oracle.json": {**base, "agent": {"kind": "flaky", "script": "../agents/flaky.json"}},
        "scripted_oracle.json": {**base, "agent": {"kind": "scripted",
                                                   "script": "../agents/scripted.json"}},
        "noisy_judge.json": {"judge": {"kind": "noisy", "flip_probability": 0.3, "seed": 42,
                                       "inner": {"kind": "oracle"}}},
    }
    for name, c in cfgs.items():
        (configs / name).write_text(json.dumps(c, indent=2) + "\n")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--root", default=str(pathlib.Path(__file__).resolve().parent.parent))
    build(pathlib.Path(p.parse_args().root))


if __name__ == "__main__":
    main()
