#!/usr/bin/env python3
"""Regenerates the synthetic training fixtures in this directory.

    python3 tests/data/make_fixtures.py

Output is deterministic; the checked-in files are the output of this script.
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

STATES = ["texas", "ohio", "utah", "iowa", "maine", "idaho", "nevada", "oregon", "alaska", "kansas"]
CITIES = ["dallas", "boston", "denver", "atlanta", "seattle", "miami", "austin", "phoenix", "chicago", "portland"]


def geo():
    rows = []
    for s in STATES:
        rows.append((f"what states border {s}", f"lambda $0 e (and (state:t $0) (next_to:t $0 {s}:s))"))
        rows.append((f"how many rivers are in {s}", f"count $0 (and (river:t $0) (loc:t $0 {s}:s))"))
        rows.append((f"what is the largest city in {s}",
                     f"argmax $0 (and (city:t $0) (loc:t $0 {s}:s)) (size:i $0)"))
        rows.append((f"what is the population of {s}", f"(population:i {s}:s)"))
    for a, b in zip(CITIES, CITIES[1:] + CITIES[:1]):
        rows.append((f"show flights from {a} to {b}",
                     f"lambda $0 e (and (flight $0) (from $0 {a}:ci) (to $0 {b}:ci))"))
    assert len(rows) == 50
    return [{"utterance": u, "mr": m} for u, m in rows]


def made_up_words(n, rng):
    consonants, vowels = "bdfgklmnprstvz", "aeiou"
    seen = set()
    while len(seen) < n:
        w = "".join(rng.choice(consonants) + rng.choice(vowels) for _ in range(3)) + rng.choice(consonants)
        seen.add(w)
    return sorted(seen)


def copy_set(rng):
    words = made_up_words(30, rng)
    rows = []
    for i, w in enumerate(words):
        kind = i % 3
        if kind == 0:
            rows.append((f"read the csv file {w}.csv with pandas", f"pandas.read_csv('{w}.csv')"))
        elif kind == 1:
            rows.append((f"call the function {w}", f"{w}()"))
        else:
            rows.append((f"load json from {w}.json", f"json.load(open('{w}.json'))"))
    return [{"utterance": u, "mr": m} for u, m in rows]


TABLES = {
    "stations": {
        "columns": ["Station", "City", "Opened"],
        "rows": [["North Gate", "Leeds", "1901"], ["Harbour", "Hull", "1923"], ["Old Mill", "York", "1899"],
                 ["Riverside", "Leeds", "1950"]],
    },
    "rivers": {
        "columns": ["River", "Length", "Country", "Mouth"],
        "rows": [["Danube", "2850", "Austria", "Black Sea"], ["Rhine", "1230", "Germany", "North Sea"],
                 ["Loire", "1006", "France", "Atlantic"], ["Elbe", "1094", "Germany", "North Sea"]],
    },
    "players": {
        "columns": ["Player", "No.", "Nationality", "Position", "Years"],
        "rows": [["Calvin Mccarty", "25", "United States", "Running back", "2003"],
                 ["Voshon Lenard", "2", "United States", "Guard", "2006"],
                 ["Tony Parker", "9", "France", "Guard", "2001"]],
    },
    "elections": {
        "columns": ["District", "Incumbent", "Party", "First elected", "Result", "Votes"],
        "rows": [["Ohio 1", "Steve Chabot", "Republican", "1994", "Re-elected", "120000"],
                 ["Ohio 2", "Rob Portman", "Republican", "1993", "Re-elected", "150000"],
                 ["Ohio 3", "Tony Hall", "Democratic", "1978", "Retired", "90000"]],
    },
}

SQL = [
    ("stations", "which city is north gate station in", "SELECT City FROM Table WHERE Station = North Gate"),
    ("stations", "how many stations are in leeds", "SELECT COUNT(Station) FROM Table WHERE City = Leeds"),
    ("stations", "when did harbour open", "SELECT Opened FROM Table WHERE Station = Harbour"),
    ("stations", "which station opened after 1920", "SELECT Station FROM Table WHERE Opened > 1920"),
    ("stations", "earliest opening year", "SELECT MIN(Opened) FROM Table"),
    ("rivers", "how long is the danube", "SELECT Length FROM Table WHERE River = Danube"),
    ("rivers", "which rivers flow into the north sea", "SELECT River FROM Table WHERE Mouth = North Sea"),
    ("rivers", "longest river in germany", "SELECT MAX(Length) FROM Table WHERE Country = Germany"),
    ("rivers", "total length of all rivers", "SELECT SUM(Length) FROM Table"),
    ("rivers", "what country is the loire in", "SELECT Country FROM Table WHERE River = Loire"),
    ("players", "what position did calvin mccarty play",
     "SELECT Position FROM Table WHERE Player = Calvin Mccarty"),
    ("players", "who wore number 9", "SELECT Player FROM Table WHERE No. = 9"),
    ("players", "how many guards are from the united states",
     "SELECT COUNT(Player) FROM Table WHERE Position = Guard AND Nationality = United States"),
    ("players", "nationality of tony parker", "SELECT Nationality FROM Table WHERE Player = Tony Parker"),
    ("players", "average jersey number", "SELECT AVG(No.) FROM Table"),
    ("elections", "who is the incumbent in ohio 2", "SELECT Incumbent FROM Table WHERE District = Ohio 2"),
    ("elections", "which party does tony hall belong to", "SELECT Party FROM Table WHERE Incumbent = Tony Hall"),
    ("elections", "how many republicans were re-elected",
     "SELECT COUNT(District) FROM Table WHERE Party = Republican AND Result = Re-elected"),
    ("elections", "when was steve chabot first elected",
     "SELECT First elected FROM Table WHERE Incumbent = Steve Chabot"),
    ("elections", "most votes received", "SELECT MAX(Votes) FROM Table"),
]

# Same question, a value that is not in the table: executes to nothing.
PLANTED = {10: "SELECT Position FROM Table WHERE Player = Calvin Mccarthy"}


def wikisql():
    out = []
    for i, (table, utterance, query) in enumerate(SQL):
        row = {"utterance": utterance, "mr": query, "table": TABLES[table]}
        if i in PLANTED:
            row["planted"] = PLANTED[i]
        out.append(row)
    return out


def write(name, rows):
    with open(HERE / name, "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


def main():
    rng = random.Random(20240611)
    write("geo_overfit.jsonl", geo())
    write("copy_oov.jsonl", copy_set(rng))
    write("wikisql_fixture.jsonl", wikisql())
    write("read_csv.jsonl", [{"utterance": "read file.csv with pandas keeping 1000 rows",
                              "mr": "pandas.read_csv('file.csv', nrows=1000)"}])


if __name__ == "__main__":
    main()
