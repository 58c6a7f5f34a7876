"""Independent reference for the 50 per-change features of the fixture targets.

Reads tests/data/gerrit_fixture.json directly (no use of the C++ code) and
writes tests/data/feature_golden.csv. Graph metrics come from networkx.
"""
import csv
import json
import math
import sys
from datetime import datetime, timedelta

import networkx as nx
import numpy as np

BOTS = ["bot", "CI", "Jenkins", "Zuul", "SonarQube"]
PSEUDO = {"/COMMIT_MSG", "/MERGE_LIST", "/PATCHSET_LEVEL"}
TARGETS = [118, 120, 121, 122, 125]
WINDOW = timedelta(days=365)
KEYWORDS = {
    "refactoring": ["refactor", "refactoring", "restructure", "cleanup", "clean up", "rename", "move code"],
    "perfective": ["improve", "enhancement", "polish", "simplify", "optimize"],
    "non_functional": ["doc", "documentation", "typo", "license", "copyright", "comment", "format", "style"],
}
NAMES = [
    "days_of_the_weeks_of_date_created", "is_created_date_a_weekend", "author_timezone",
    "degree_centrality", "closeness_centrality", "betweenness_centrality", "eigenvector_centrality",
    "clustering_coefficient", "core_number",
    "#lines_added", "#lines_deleted", "Code_churn", "#files", "#files_type", "#directory",
    "#segs_added", "#segs_deleted", "#segs_modify", "change_entropy",
    "subject_length", "subject_word_count", "msg_length", "msg_word_count",
    "is_non_fonctional", "is_perfective", "is_refactoring",
    "#owner_prior_changes", "#prior_merged_changes", "#prior_abandoned_changes", "merge_ratio",
    "#prior_subsystem_changes", "prior_code_reviews_duration_min", "prior_code_reviews_duration_max",
    "prior_code_reviews_duration_avg", "prior_code_reviews_duration_std",
    "#prior_owner_subsystem_changes", "prior_owner_subsystem_changes_ratio", "#reviewed_changes_owner",
    "#owner_previous_message", "#owner_exchanged_messages", "#owner_messages_avg_per_changes_min",
    "#owner_messages_avg_per_changes_max", "#owner_messages_avg_per_changes_avg",
    "#owner_messages_avg_per_changes_std",
    "files_changes_duration_min", "files_changes_duration_max", "files_changes_duration_avg",
    "files_changes_duration_std", "#developers_file", "#prior_changes_files",
]


def ts(s):
    return datetime.strptime(s[:26], "%Y-%m-%d %H:%M:%S.%f")


def hours(a, b):
    return (b - a) / timedelta(hours=1)


def is_bot(name):
    return any(m in name for m in BOTS)


def segments(content):
    added = deleted = modified = 0
    run, has_a, has_b = False, False, False
    for entry in content + [{"ab": []}]:
        if "ab" in entry or "skip" in entry:
            if run:
                if has_a and has_b:
                    modified += 1
                elif has_b:
                    added += 1
                elif has_a:
                    deleted += 1
            run, has_a, has_b = False, False, False
            continue
        run = True
        has_a = has_a or bool(entry.get("a"))
        has_b = has_b or bool(entry.get("b"))
    return added, deleted, modified


def load(doc):
    created = ts(doc["created"])
    rev = min(doc["revisions"].values(), key=lambda r: r["_number"])
    author = rev["commit"]["author"]
    text = rev["commit"]["message"]
    subject, _, body = text.partition("\n")
    diffs = doc.get("_fixture_diffs", {})
    files = []
    for path, info in rev["files"].items():
        if path in PSEUDO:
            continue
        ins, dele = info.get("lines_inserted", 0), info.get("lines_deleted", 0)
        seg = segments(diffs[path]["content"]) if path in diffs else None
        files.append((path, ins, dele, seg))
    msgs = []
    last_abandon = None
    reopened = False
    for m in doc.get("messages", []):
        at = max(ts(m["date"]), created)
        a = m.get("author")
        if a:
            msgs.append((a["_account_id"], at, is_bot(a["name"]) or is_bot(a["username"])))
        else:
            msgs.append((None, at, True))
        if m["message"].startswith("Restored"):
            reopened = True
        if m["message"].startswith("Abandoned"):
            last_abandon = at
    status = doc["status"]
    closed = None
    if status == "MERGED":
        closed = ts(doc["submitted"])
    elif status == "ABANDONED":
        closed = last_abandon if last_abandon else ts(doc["updated"])
    if closed is not None:
        closed = max(closed, created)
    return {"number": doc["_number"], "owner": doc["owner"]["_account_id"], "created": created,
            "closed": closed, "status": status, "tz": author.get("tz", 0), "subject": subject.strip(),
            "body": body.strip(), "files": files, "msgs": msgs, "reopened": reopened}


def summary(xs):
    if not xs:
        return [0.0, 0.0, 0.0, 0.0]
    mean = sum(xs) / len(xs)
    return [min(xs), max(xs), mean, math.sqrt(sum((x - mean) ** 2 for x in xs) / len(xs))]


def entropy(churns):
    active = [c for c in churns if c > 0]
    if len(active) < 2:
        return 0.0
    total = sum(active)
    h = -sum((c / total) * math.log2(c / total) for c in active)
    return min(1.0, max(0.0, h / math.log2(len(active))))


def collaboration(rec, changes):
    t = rec["created"]
    g = nx.Graph()
    for h in changes:
        if not (t - WINDOW <= h["created"] < t):
            continue
        parts = {a for a, at, bot in h["msgs"] if a is not None and not bot and at < t and a != h["owner"]}
        for p in parts:
            g.add_edge(h["owner"], p)
    v = rec["owner"]
    if v not in g:
        return [0.0] * 6
    comp = g.subgraph(nx.node_connected_component(g, v))
    if comp.number_of_nodes() > 1:
        nodes = list(comp.nodes())
        a = nx.to_numpy_array(comp, nodelist=nodes)
        w, vecs = np.linalg.eigh(a)
        vec = np.abs(vecs[:, np.argmax(w)])
        eig = float(vec[nodes.index(v)] / vec.max())
    else:
        eig = 0.0
    return [nx.degree_centrality(g)[v], nx.closeness_centrality(g, v), nx.betweenness_centrality(g)[v],
            eig, nx.clustering(g, v), float(nx.core_number(g)[v])]


def features(rec, changes):
    t = rec["created"]
    local = t + timedelta(minutes=rec["tz"])
    day = local.weekday()
    date = [float(day), 1.0 if day >= 5 else 0.0, float(rec["tz"])]

    files = rec["files"]
    if files:
        added = float(sum(f[1] for f in files))
        deleted = float(sum(f[2] for f in files))
        exts = set()
        dirs = set()
        sa = sd = sm = 0
        for path, ins, dele, seg in files:
            base = path.rsplit("/", 1)[-1]
            dot = base.rfind(".")
            exts.add("" if dot <= 0 else base[dot:])
            dirs.add(path.rsplit("/", 1)[0] if "/" in path else ".")
            if seg is not None:
                sa, sd, sm = sa + seg[0], sd + seg[1], sm + seg[2]
            elif ins > 0 and dele > 0:
                sm += 1
            elif ins > 0:
                sa += 1
            elif dele > 0:
                sd += 1
        code = [added, deleted, added + deleted, float(len(files)), float(len(exts)), float(len(dirs)),
                float(sa), float(sd), float(sm), entropy([f[1] + f[2] for f in files])]
    else:
        code = [0.0] * 10

    desc = rec["body"].lower()
    text = [float(len(rec["subject"])), float(len(rec["subject"].split())), float(len(rec["body"])),
            float(len(rec["body"].split())),
            1.0 if any(k in desc for k in KEYWORDS["non_functional"]) else 0.0,
            1.0 if any(k in desc for k in KEYWORDS["perfective"]) else 0.0,
            1.0 if any(k in desc for k in KEYWORDS["refactoring"]) else 0.0]

    prior = [h for h in changes if h["number"] != rec["number"] and h["created"] < t
             and h["closed"] is not None and h["closed"] <= t]
    subsystems = {f[0].split("/", 1)[0] if "/" in f[0] else "." for f in files}

    def touches(h):
        return any((f[0].split("/", 1)[0] if "/" in f[0] else ".") in subsystems for f in h["files"])

    def counted(h):
        return [(a, at) for a, at, bot in h["msgs"] if a is not None and not bot and at < t]

    own = [h for h in prior if h["owner"] == rec["owner"]]
    others = [h for h in prior if h["owner"] != rec["owner"]]
    merged = sum(1 for h in own if h["status"] == "MERGED")
    abandoned = sum(1 for h in own if h["status"] == "ABANDONED")
    own_sub = sum(1 for h in own if touches(h))
    per_change = [float(len(counted(h))) for h in own]
    owner = [float(len(own)), float(merged), float(abandoned), merged / len(own) if own else 0.0,
             float(sum(1 for h in prior if touches(h)))]
    owner += summary([hours(h["created"], h["closed"]) for h in own])
    owner += [float(own_sub), own_sub / len(own) if own else 0.0,
              float(sum(1 for h in others if any(a == rec["owner"] for a, _ in counted(h)))),
              float(sum(1 for h in own for a, _ in counted(h) if a == rec["owner"])),
              float(sum(per_change))]
    owner += summary(per_change)

    paths = {f[0] for f in files}
    overlap = [h for h in prior if any(f[0] in paths for f in h["files"])]
    fh = summary([hours(h["created"], h["closed"]) for h in overlap])
    fh += [float(len({h["owner"] for h in overlap})), float(len(overlap))]

    return date + collaboration(rec, changes) + code + text + owner + fh


def main(fixture, out):
    with open(fixture, encoding="utf-8") as f:
        changes = [load(d) for d in json.load(f)]
    by_number = {c["number"]: c for c in changes}
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["change_number", "target_hours"] + NAMES)
        for n in TARGETS:
            rec = by_number[n]
            vals = features(rec, changes)
            assert len(vals) == 50
            w.writerow([n, repr(hours(rec["created"], rec["closed"]))] + [repr(float(v)) for v in vals])


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
