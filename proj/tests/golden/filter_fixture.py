"""Writes the 12-record filter boundary fixture and its hand-computed report."""
import json
import sys
from datetime import datetime, timedelta, timezone

BASE = datetime(2021, 3, 1, 9, 0, 0, tzinfo=timezone.utc)


def ts(t):
    return t.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def msg(author_id, name, at, text="Looks good", bot=False):
    return {"author_id": author_id, "author_name": name, "posted_at": ts(at), "text": text,
            "from_bot": bot, "revision_number": 1}


def record(number, hours, status="MERGED", reopened=False, reviewers=("Rita",), bot_only=False):
    created = BASE + timedelta(days=number)
    closed = None if hours is None else created + timedelta(hours=hours)
    msgs = [msg(10, "Owen", created + timedelta(minutes=5), "Uploaded patch set 1.")]
    if bot_only:
        msgs.append(msg(90, "Jenkins CI", created + timedelta(minutes=30), "Build succeeded"))
    else:
        for i, name in enumerate(reviewers):
            msgs.append(msg(20 + i, name, created + timedelta(minutes=40)))
    return {
        "change_id": "I%040d" % number, "number": number, "project": "demo", "branch": "master",
        "status": status, "created_at": ts(created), "closed_at": None if closed is None else ts(closed),
        "owner_id": 10, "owner_name": "Owen", "owner_tz_offset_minutes": 0, "tz_missing": False,
        "subject": "Change %d" % number, "message_body": "", "files": [], "messages": msgs,
        "reopened": reopened, "insertions_total": 0, "deletions_total": 0,
    }


RECORDS = [
    record(1, None, status="NEW"),                  # incomplete
    record(2, 100, reopened=True),                  # reopened
    record(3, 100, reviewers=()),                   # self-reviewed: owner only
    record(4, 100, bot_only=True),                  # self-reviewed: owner + bot
    record(5, 24),                                  # short: exactly 24h
    record(6, 24 + 1 / 3600),                       # kept: 24h + 1s
    record(7, 504),                                 # kept: exactly 504h
    record(8, 504 + 1 / 3600),                      # long: 504h + 1s
    record(9, 10),                                  # short
    record(10, 600),                                # long
    record(11, 100),                                # kept
    record(12, 10, reopened=True),                  # reopened wins over short
]

REPORT = {"kept": 3, "dropped_incomplete": 1, "dropped_reopened": 2, "dropped_self": 2,
          "dropped_short": 2, "dropped_long": 2, "total": 12, "kept_numbers": [6, 7, 11]}


def main(out_dir):
    with open(out_dir + "/filter_fixture.jsonl", "w") as f:
        for r in RECORDS:
            f.write(json.dumps(r, sort_keys=True) + "\n")
    with open(out_dir + "/filter_fixture_report.json", "w") as f:
        json.dump(REPORT, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
