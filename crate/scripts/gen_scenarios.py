#!/usr/bin/env python3
"""Writes the shipped scenario documents to crates/sim/assets/scenarios/.

Run from the repository root. Output is deterministic; re-running leaves the
files unchanged.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "sim" / "assets" / "scenarios"

TEXTURES = [
    {"id": "floor", "category": "ground", "glyph": "."},
    {"id": "wood", "category": "ground", "glyph": "="},
    {"id": "pavement", "category": "ground", "glyph": ":"},
    {"id": "grass", "category": "ground", "glyph": '"'},
    {"id": "brick", "category": "wall", "glyph": "#"},
    {"id": "fence", "category": "wall", "glyph": "+"},
    {"id": "water", "category": "wall", "glyph": "~"},
    {"id": "hedge", "category": "wall", "glyph": "%"},
]


class Grid:
    def __init__(self, width, height, ground="pavement"):
        self.width, self.height = width, height
        self.ground = {(x, y): ground for x in range(width) for y in range(height)}
        self.blocker = {}
        self.regions = []
        self.objects = []

    def fill(self, x0, y0, x1, y1, ground):
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                self.ground[(x, y)] = ground

    def wall(self, cells, texture="brick"):
        for c in cells:
            self.blocker[c] = texture

    def clear(self, cells):
        for c in cells:
            self.blocker.pop(c, None)

    def border(self, x0, y0, x1, y1, texture="brick"):
        cells = [(x, y0) for x in range(x0, x1 + 1)] + [(x, y1) for x in range(x0, x1 + 1)]
        cells += [(x0, y) for y in range(y0, y1 + 1)] + [(x1, y) for y in range(y0, y1 + 1)]
        self.wall(cells, texture)

    def region(self, name, description, x0, y0, x1, y1):
        cells = [
            [x, y]
            for y in range(y0, y1 + 1)
            for x in range(x0, x1 + 1)
            if (x, y) not in self.blocker
        ]
        self.regions.append({"name": name, "description": description, "cells": cells})

    def furniture(self, oid, name, description, at, function=(), states=()):
        self.objects.append(
            {
                "id": oid,
                "name": name,
                "type": "furniture",
                "description": description,
                "function": [{"verb": v, "label": l, "target": t} for v, l, t in function],
                "states": list(states),
                "location": list(at),
            }
        )

    def item(self, oid, name, description, location=None, function=(), states=()):
        doc = {
            "id": oid,
            "name": name,
            "type": "item",
            "description": description,
            "function": [{"verb": v, "label": l, "target": t} for v, l, t in function],
            "states": list(states),
        }
        if location is not None:
            doc["location"] = location
        self.objects.append(doc)

    def document(self):
        cells = []
        for y in range(self.height):
            for x in range(self.width):
                c = {"x": x, "y": y, "ground": self.ground[(x, y)]}
                if (x, y) in self.blocker:
                    c["blocker"] = self.blocker[(x, y)]
                cells.append(c)
        return {
            "width": self.width,
            "height": self.height,
            "textures": TEXTURES,
            "cells": cells,
            "regions": self.regions,
            "objects": self.objects,
        }


def counts(name, pairs):
    return {"name": name, "mode": "counts", "categories": [{"value": v, "count": c} for v, c in pairs]}


def probs(name, pairs):
    return {"name": name, "mode": "probabilities", "categories": [{"value": v, "p": p} for v, p in pairs]}


# Study 1: isolated residential blocks with low or high greenery.

FRAGMENTATION = [
    {
        "id": "distrust",
        "prompt": "I have little confidence that the people and institutions around me act with integrity.",
        "dimension": "distrust",
        "scale": [1, 7],
    },
    {
        "id": "exploitation",
        "prompt": "I feel that others in this community use people unfairly for their own benefit.",
        "dimension": "exploitation",
        "scale": [1, 7],
    },
    {
        "id": "indifference",
        "prompt": "People here show little interest in social issues or in the troubles of others.",
        "dimension": "indifference",
        "scale": [1, 7],
    },
]

RESIDENT_NAMES = [
    "Ji-eun Kim",
    "Soo-min Lee",
    "Na-young Park",
    "Min-jun Choi",
    "Seo-yeon Jung",
    "Do-hyun Kang",
    "Ha-eun Yoon",
    "Jae-won Lim",
    "Ye-jin Han",
    "Hyun-woo Shin",
]

RESIDENT_OCCUPATIONS = [
    "fashion designer",
    "lawyer",
    "software engineer",
    "cardiologist",
    "architect",
    "elementary school teacher",
    "graphic illustrator",
    "accountant",
    "nurse",
    "university student",
]


def study1_map(high_greenery):
    g = Grid(26, 20)
    g.border(0, 0, 25, 19, "fence")
    # Apartment block with one door onto the courtyard.
    g.fill(1, 1, 10, 8, "wood")
    g.border(0, 0, 11, 9)
    g.wall([(x, 0) for x in range(26)], "fence")
    g.wall([(0, y) for y in range(20)], "fence")
    g.clear([(11, 4), (5, 9)])
    g.region(
        "Apartment",
        "shared apartment rooms where residents wait out the isolation order",
        1, 1, 10, 8,
    )
    g.furniture("design-desk", "Design Desk", "a drafting desk covered in fabric swatches", (2, 2),
                [("add", "feeling inspired", "actor")])
    g.furniture("sewing-table", "Sewing Table", "a sewing machine on a sturdy table", (4, 2),
                [("add", "absorbed in work", "actor")])
    g.furniture("work-desk", "Work Desk", "a desk stacked with case files and a laptop", (8, 2),
                [("add", "absorbed in work", "actor")])
    g.furniture("bookshelf", "Bookshelf", "shelves of novels and reference books", (10, 1),
                [("add", "feeling calm", "actor")])
    g.furniture("sofa", "Sofa", "a worn but comfortable sofa", (3, 7),
                [("add", "resting", "actor")])
    g.furniture("window-seat", "Window Seat", "a cushioned seat looking out over the block", (10, 7),
                [("add", "looking outside", "actor")])
    g.item("sketchbook", "Sketchbook", "a sketchbook full of garment designs", [4, 4],
           [("add", "sketching", "actor")])
    g.item("case-files", "Case Files", "a folder of legal case notes", [7, 4],
           [("add", "reviewing a case", "actor")])
    g.item("coffee-mug", "Coffee Mug", "a mug of warm instant coffee", [6, 6],
           [("add", "sipping coffee", "actor")])

    g.region(
        "Courtyard",
        "a paved courtyard between the buildings, mostly empty",
        12, 1, 24, 8,
    )
    g.furniture("courtyard-bench", "Courtyard Bench", "a concrete bench facing the street", (18, 4),
                [("add", "resting", "actor")])

    if high_greenery:
        g.fill(1, 10, 24, 18, "grass")
        lake = [(x, y) for x in range(9, 16) for y in range(13, 17)]
        g.wall(lake, "water")
        g.region(
            "Park",
            "a wide green park with tall trees, flower beds and shaded paths",
            1, 10, 24, 18,
        )
        # The lakeside is carved out of the park as its own region.
        side = {(x, y) for x in range(8, 17) for y in range(12, 18)} - set(lake)
        park = g.regions[-1]
        park["cells"] = [c for c in park["cells"] if tuple(c) not in side]
        g.regions.append(
            {
                "name": "Lakeside",
                "description": "benches along a quiet lake under willow trees",
                "cells": [[x, y] for y in range(12, 18) for x in range(8, 17) if (x, y) in side],
            }
        )
        benches = [(8, 13), (16, 14), (12, 12), (12, 17)]
        for i, at in enumerate(benches, 1):
            g.furniture(f"lake-bench-{i}", f"Lakeside Bench {i}", "a wooden bench facing the water", at,
                        [("add", "feeling calm", "actor"), ("add", "resting", "actor")])
        trees = [(2, 11), (5, 12), (3, 16), (6, 17), (19, 11), (22, 13), (20, 16), (23, 17), (17, 10), (4, 14)]
        for i, at in enumerate(trees, 1):
            g.furniture(f"tree-{i}", f"Oak Tree {i}", "a tall oak tree giving deep shade", at,
                        [("add", "in the shade", "actor")])
        g.furniture("flower-bed", "Flower Bed", "a bed of blooming azaleas", (21, 11),
                    [("add", "cheered by flowers", "actor")])
        g.furniture("park-bench", "Park Bench", "a bench on the shaded path", (2, 13),
                    [("add", "resting", "actor")])
    else:
        g.fill(1, 10, 24, 18, "pavement")
        g.region(
            "Parking Lot",
            "an asphalt parking lot with a few parked cars",
            1, 10, 17, 18,
        )
        g.fill(19, 14, 23, 17, "grass")
        g.wall([(18, y) for y in range(10, 14)], "hedge")
        g.region(
            "Green Patch",
            "a small strip of grass with a single young tree",
            19, 14, 23, 17,
        )
        for i, at in enumerate([(3, 12), (7, 12), (11, 12), (3, 16), (7, 16), (11, 16)], 1):
            g.furniture(f"car-{i}", f"Parked Car {i}", "a parked hatchback", at, [("add", "bored", "actor")])
        g.furniture("young-tree", "Young Tree", "a thin sapling tied to a stake", (21, 15),
                    [("add", "in the shade", "actor")])
        g.furniture("patch-bench", "Patch Bench", "a metal bench on the grass", (23, 17),
                    [("add", "resting", "actor")])
    return g.document()


def study1(high):
    label = "high" if high else "low"
    return {
        "name": f"study1_{label}",
        "description": (
            "An isolated residential community under a stay-at-home order, with "
            + ("a large green park and lake." if high else "almost no vegetation.")
        ),
        "map": study1_map(high),
        "population": {
            "groups": [
                {
                    "name": "Residents",
                    "size": 10,
                    "stance_label": "residents of the block",
                    "long_term_goal_template": (
                        "Keep up my life as a {occupation} while the community is isolated."
                    ),
                    "short_term_goal": "settle in for the day",
                    "initial_region": "Apartment",
                    "names": RESIDENT_NAMES,
                    "distributions": [
                        counts("occupation", [(o, 1) for o in RESIDENT_OCCUPATIONS]),
                        counts("gender", [("Female", 6), ("Male", 4)]),
                        probs("age_band", [("18-29", 0.3), ("30-49", 0.5), (">=50", 0.2)]),
                    ],
                }
            ],
            "seed_policy": {"mode": "fixed", "seed": 2025},
        },
        "events": [],
        "questionnaire": FRAGMENTATION,
        "config": {"perception_radius": 10, "wm_capacity": 10, "retrieval_k": 3},
        "phases": [50],
        "rounds": 50,
    }


# Study 2: a neighbourhood split over a planned incinerator.

# (name, stance, initial region, male count, age counts, education counts)
STUDY2_GROUPS = [
    (
        "Economic Development Supporters",
        "Initially support the plant and emphasize economic benefits and job opportunities.",
        "Community Center",
        4,
        [3, 2, 5],
        [3, 4, 1, 2],
    ),
    (
        "Environmental Advocates",
        "Initially oppose the incinerator and spread environmental information quickly.",
        "Neighborhood Park",
        4,
        [2, 6, 2],
        [4, 4, 2, 0],
    ),
    (
        "Neutral Residents",
        "Hold no firm view yet and are swayed by neighbours and new information.",
        "Residential Street",
        6,
        [2, 7, 1],
        [1, 3, 5, 1],
    ),
]

EDUCATION = ["High School", "Some College", "Bachelor's Degree", "Graduate Degree"]
AGES = ["18-29", "30-49", ">=50"]

STUDY2_NAMES = {
    "Economic Development Supporters": [
        "Harold Brooks", "Linda Carter", "Frank Diaz", "Susan Ellis", "Robert Fox",
        "Karen Green", "Thomas Hall", "Nancy Irwin", "George Jensen", "Betty King",
    ],
    "Environmental Advocates": [
        "Maya Lopez", "Ethan Moore", "Chloe Nguyen", "Lucas Ortiz", "Grace Patel",
        "Owen Quinn", "Zoe Reed", "Noah Silva", "Lily Turner", "Ruby Vance",
    ],
    "Neutral Residents": [
        "Adam Walsh", "Bella Young", "Carl Zimmer", "Diana Abbott", "Evan Baker",
        "Fiona Cole", "Gavin Dunn", "Hannah Ford", "Ian Grant", "Julia Hayes",
    ],
}


def study2_map():
    g = Grid(30, 22)
    g.border(0, 0, 29, 21, "fence")
    # Community center, a walled hall with two doors.
    g.fill(1, 1, 9, 8, "wood")
    g.border(0, 0, 10, 9)
    g.wall([(x, 0) for x in range(30)], "fence")
    g.wall([(0, y) for y in range(22)], "fence")
    g.clear([(10, 4), (5, 9)])
    g.region("Community Center", "the neighbourhood hall where residents hold meetings", 1, 1, 9, 8)
    g.furniture("notice-board", "Notice Board", "the board where official announcements are pinned", (1, 4),
                [("add", "informed about the plan", "actor")])
    g.furniture("meeting-table", "Meeting Table", "a long table for residents' meetings", (5, 3),
                [("add", "in a meeting", "actor")])
    g.furniture("coffee-urn", "Coffee Urn", "an urn of free coffee", (9, 1), [("add", "sipping coffee", "actor")])

    g.fill(11, 1, 28, 8, "grass")
    g.region("Neighborhood Park", "a green park with a playground where families gather", 11, 1, 28, 8)
    g.furniture("playground", "Playground", "swings and a slide", (20, 4), [("add", "watching children", "actor")])
    g.furniture("park-bench", "Park Bench", "a bench under a maple tree", (14, 2), [("add", "resting", "actor")])
    g.furniture("petition-stand", "Petition Stand", "a folding table with a clipboard", (26, 7),
                [("add", "signed the petition", "actor")])

    g.region("Residential Street", "a row of houses along a quiet street", 1, 10, 18, 15)
    g.furniture("mailboxes", "Mailboxes", "a bank of neighbourhood mailboxes", (3, 12),
                [("add", "checked the mail", "actor")])
    g.furniture("corner-store", "Corner Store", "a small shop that sells everyday goods", (15, 12),
                [("add", "did some shopping", "actor")])

    g.fill(19, 10, 28, 20, "pavement")
    g.region("Vacant Lot", "the empty plot where the incinerator would be built", 19, 10, 28, 20)
    g.furniture("site-sign", "Site Sign", "a sign reading 'Proposed Waste-to-Energy Facility'", (24, 15),
                [("add", "thinking about the plant", "actor")])

    g.region("Community Entrance", "the road into the neighbourhood where newcomers arrive", 1, 16, 18, 20)
    g.item("flyer", "Information Flyer", "a flyer about the incinerator plan", [5, 18],
           [("add", "informed about the plan", "actor")])
    return g.document()


def study2():
    groups = []
    for name, stance, region, m, age, edu in STUDY2_GROUPS:
        groups.append(
            {
                "name": name,
                "size": 10,
                "stance_label": name,
                "long_term_goal_template": stance + " As a {occupation}, I want what is best for my family and neighbours.",
                "short_term_goal": "go about my day in the neighbourhood",
                "initial_region": region,
                "names": STUDY2_NAMES[name],
                "distributions": [
                    counts("gender", [("Male", m), ("Female", 10 - m)]),
                    counts("age_band", list(zip(AGES, age))),
                    counts("education", list(zip(EDUCATION, edu))),
                ],
                "occupations": [
                    "retail worker", "truck driver", "office clerk", "nurse", "teacher",
                    "small business owner", "retired engineer", "construction worker", "student", "accountant",
                ],
            }
        )
    return {
        "name": "study2_incinerator",
        "description": "A residential community reacts to a plan for a waste incineration plant on a vacant plot.",
        "map": study2_map(),
        "population": {"groups": groups},
        "events": [
            {
                "id": "plan-announced",
                "description": "The city pins its plan for an incineration plant to the notice board.",
                "activation": {"kind": "scheduled", "round": 0},
                "effects": [{"select": {"object": "notice-board"}, "verb": "add", "label": "incinerator plan posted"}],
                "intervention": {"select": "all", "goal": "find out what the incinerator plan means for the neighbourhood"},
            },
            {
                "id": "site-visit",
                "description": "Residents who look at the site sign start worrying about smoke.",
                "activation": {"kind": "action", "verb": "use", "target": "site-sign"},
                "range": {"region": "Vacant Lot"},
                "effects": [{"select": "agents", "verb": "add", "label": "worried about smoke"}],
                "once": False,
            },
        ],
        "questionnaire": [
            {
                "id": "plant-support",
                "prompt": "How strongly do you support building the incineration plant?",
                "dimension": "support",
                "scale": [1, 7],
            }
        ],
        "config": {"perception_radius": 10, "wm_capacity": 10, "retrieval_k": 3},
        "spawn_region": "Community Entrance",
        "phases": [21],
        "rounds": 21,
    }


# Study 3: a small-town cafe with six roles and a temporary-worker slot.

CAFE_ROLES = [
    ("Cafe Owner", "Bar Area", ["Eleanor Finch"],
     "I manage this cafe and keep it orderly; I value tradition and a calm atmosphere."),
    ("Staff", "Bar Area", ["Caleb Morris", "Marisol Vega"],
     "I work behind the bar, know the regulars well and love to pass on news."),
    ("Regular Customers", "Seating Area", ["Leo Zhang", "Ava Ramires"],
     "This cafe is my second home and I feel I belong to its culture."),
    ("Students", "Reading Area", ["Jonas Müller", "Emily Carter"],
     "I am new around here, curious and eager to fit in, so I ask a lot of questions."),
    ("Tourists", "Seating Area", ["Mason Liu", "Nina Petrova"],
     "I am visiting town and see this place with an outsider's eye."),
    ("Cleaner", "Back Room", ["Samuel Okafor"],
     "I keep the cafe clean, move around freely and notice what others miss."),
]

# Initial attitudes between named agents: (from, to, attitude).
CAFE_ATTITUDES = [
    ("Eleanor Finch", "Staff", "positive"),
    ("Eleanor Finch", "Leo Zhang", "negative"),
    ("Eleanor Finch", "Ava Ramires", "positive"),
    ("Eleanor Finch", "Samuel Okafor", "neutral"),
    ("Caleb Morris", "Eleanor Finch", "positive"),
    ("Caleb Morris", "Leo Zhang", "negative"),
    ("Marisol Vega", "Eleanor Finch", "positive"),
    ("Marisol Vega", "Regular Customers", "positive"),
    ("Marisol Vega", "Tourists", "neutral"),
    ("Leo Zhang", "Eleanor Finch", "negative"),
    ("Leo Zhang", "Caleb Morris", "negative"),
    ("Leo Zhang", "Jonas Müller", "positive"),
    ("Leo Zhang", "Ava Ramires", "neutral"),
    ("Ava Ramires", "Staff", "positive"),
    ("Ava Ramires", "Leo Zhang", "neutral"),
    ("Jonas Müller", "Leo Zhang", "positive"),
    ("Jonas Müller", "Emily Carter", "positive"),
    ("Emily Carter", "Jonas Müller", "positive"),
    ("Emily Carter", "Eleanor Finch", "neutral"),
    ("Mason Liu", "Nina Petrova", "positive"),
    ("Mason Liu", "Caleb Morris", "neutral"),
    ("Nina Petrova", "Mason Liu", "positive"),
    ("Nina Petrova", "Cafe Owner", "neutral"),
    ("Samuel Okafor", "Eleanor Finch", "neutral"),
    ("Samuel Okafor", "Students", "positive"),
]


def study3_map():
    g = Grid(22, 15, "floor")
    g.border(0, 0, 21, 14)
    g.fill(1, 1, 9, 6, "wood")
    g.region("Bar Area", "the espresso bar with its counter and stools, run by the owner", 1, 1, 9, 6)
    for i, x in enumerate(range(2, 9), 1):
        g.furniture(f"counter-{i}", f"Counter {i}", "a section of the long wooden bar counter", (x, 1),
                    [("add", "leaning on the counter", "actor")])
    g.furniture("espresso-machine", "Espresso Machine", "a polished two-group espresso machine", (1, 1),
                [("add", "making coffee", "actor")])
    for i, x in enumerate((2, 4, 6, 8), 1):
        g.furniture(f"bar-stool-{i}", f"Bar Stool {i}", "a tall stool at the counter", (x, 3),
                    [("add", "seated", "actor")])
    g.item("cup", "Coffee Cup", "a ceramic cup", [5, 5], [("add", "holding a coffee", "actor")])

    g.region("Seating Area", "small tables by the front window", 10, 1, 20, 6)
    seat = 1
    for t, (tx, ty) in enumerate([(12, 2), (17, 2), (12, 5), (17, 5)], 1):
        g.furniture(f"table-{t}", f"Table {t}", "a round cafe table", (tx, ty), [("add", "seated", "actor")])
        for dx in (-1, 1):
            g.furniture(f"chair-{seat}", f"Chair {seat}", "a bentwood chair", (tx + dx, ty), [("add", "seated", "actor")])
            seat += 1

    g.wall([(x, 9) for x in range(1, 12)])
    g.clear([(6, 9)])
    g.fill(1, 10, 11, 13, "wood")
    g.region("Reading Area", "a quiet corner with bookshelves and armchairs at the back", 1, 10, 11, 13)
    g.furniture("bookshelf", "Bookshelf", "shelves of secondhand books", (1, 10), [("add", "browsing books", "actor")])
    for i, x in enumerate((3, 6, 9), 1):
        g.furniture(f"armchair-{i}", f"Armchair {i}", "a deep leather armchair", (x, 12), [("add", "reading", "actor")])
    g.furniture("reading-lamp", "Reading Lamp", "a brass floor lamp", (11, 10), [("add", "in warm light", "actor")])
    g.item("newspaper", "Newspaper", "today's town newspaper", [4, 11], [("add", "reading the news", "actor")])

    g.region("Middle Aisle", "the open floor between the bar and the back", 1, 7, 20, 8)

    g.wall([(12, y) for y in range(9, 14)])
    g.wall([(x, 9) for x in range(12, 21)])
    g.wall([(16, y) for y in range(10, 14)])
    g.clear([(18, 9), (16, 11)])
    g.region("Back Room", "a storage room with cleaning supplies", 13, 10, 15, 13)
    g.furniture("supply-closet", "Supply Closet", "a closet of mops and cleaning spray", (13, 10),
                [("add", "cleaning", "actor")])
    g.item("mop", "Mop", "a wet mop", [15, 12], [("add", "cleaning", "actor")])
    g.region("Entrance", "the front door where customers and new staff come in", 17, 10, 20, 13)
    return g.document()


def study3():
    groups = []
    for role, region, names, awareness in CAFE_ROLES:
        groups.append(
            {
                "name": role,
                "size": len(names),
                "stance_label": role,
                "long_term_goal_template": awareness,
                "self_awareness_template": "I am {name}, one of the cafe's " + role.lower() + ". " + awareness,
                "short_term_goal": "start the day at the cafe",
                "initial_region": region,
                "names": names,
            }
        )
    return {
        "name": "study3_cafe",
        "description": "A small-town cafe with six roles; a researcher joins as a temporary worker.",
        "map": study3_map(),
        "population": {
            "groups": groups,
            "relationships": [{"from": f, "to": t, "attitude": a} for f, t, a in CAFE_ATTITUDES],
        },
        "events": [
            {
                "id": "machine-breakdown",
                "description": "The espresso machine breaks down during the morning rush.",
                "activation": {"kind": "scheduled", "round": 50},
                "effects": [{"select": {"object": "espresso-machine"}, "verb": "add", "label": "broken"}],
                "intervention": {"select": {"group": "Staff"}, "goal": "calm the waiting customers while the machine is down"},
            },
            {
                "id": "queue-tension",
                "description": "A broken machine at the bar makes everyone nearby impatient.",
                "activation": {"kind": "existence", "state": "broken"},
                "range": {"region": "Bar Area"},
                "effects": [{"select": "agents", "verb": "add", "label": "impatient"}],
            },
            {
                "id": "moment-of-silence",
                "description": "A sudden silence falls over the cafe.",
                "activation": {"kind": "scheduled", "round": 55},
                "effects": [{"select": "agents", "verb": "remove", "label": "impatient"}],
                "intervention": {"select": "all", "goal": "reflect on how trust can be rebuilt after a conflict"},
            },
            {
                "id": "bar-confrontation",
                "description": "Leo confronts the group at the bar about whose voices count here.",
                "activation": {"kind": "scheduled", "round": 60},
                "intervention": {
                    "select": {"agents": ["regular-customers-01"]},
                    "goal": "challenge the people at the Bar Area about who gets heard in this cafe",
                },
            },
        ],
        "questionnaire": [
            {
                "id": "belonging",
                "prompt": "I feel I belong to the community of this cafe.",
                "dimension": "belonging",
                "scale": [1, 7],
            },
            {
                "id": "order",
                "prompt": "The cafe has a clear and fair social order.",
                "dimension": "order",
                "scale": [1, 7],
            },
        ],
        "config": {"perception_radius": 10, "wm_capacity": 10, "retrieval_k": 3},
        "spawn_region": "Entrance",
        "phases": [25, 50, 75],
        "rounds": 75,
        "slots": [
            {
                "name": "Researcher",
                "group": "Temporary Worker",
                "self_awareness": "I am a temporary worker who has just started at the cafe.",
                "long_term_goal": "understand how the people of this cafe relate to one another",
                "short_term_goal": "learn the daily routine",
            }
        ],
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in [
        ("study1_low", study1(False)),
        ("study1_high", study1(True)),
        ("study2_incinerator", study2()),
        ("study3_cafe", study3()),
    ]:
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
        print(path)


if __name__ == "__main__":
    main()
