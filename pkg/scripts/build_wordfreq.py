#!/usr/bin/env python3
"""Regenerate the bundled word-frequency lexicon.

Ranks follow general conversational-English frequency orderings, with a tail
of everyday and healthcare vocabulary so the prefix-completion baseline has
domain coverage. Counts are Zipf-shaped from rank: count = 1e7 / rank^1.05.
"""

from pathlib import Path

RANKED = """
the be to of and a in that have i it for not on with he as you do at this but
his by from they we say her she or an will my one all would there their what
so up out if about who get which go me when make can like time no just him
know take people into year your good some could them see other than then now
look only come its over think also back after use two how our work first well
way even new want because any these give day most us is are was were been has
had did says said went gone got made came seen known taken found given told
felt kept left meant heard let put set run move live believe hold bring happen
write provide sit stand lose pay meet include continue learn change lead
understand watch follow stop create speak read allow add spend grow open walk
win offer remember love consider appear buy wait serve die send expect build
stay fall cut reach kill remain i'm it's don't that's what's can't you're i've
let's didn't doesn't isn't he's she's we're they're i'll you'll won't wasn't
aren't haven't couldn't wouldn't shouldn't there's here's who's
yes okay please thanks thank sorry hello hi hey right sure really very much
more less many few little big small long short high low early late soon often
always never sometimes usually again still already yet almost enough quite
too s o'clock today tomorrow tonight yesterday morning afternoon evening
night week weekend month monday tuesday wednesday thursday friday saturday
sunday january june july spring summer autumn winter
home house room kitchen office school work job meeting report deadline store
shop market restaurant cafe coffee tea water food breakfast lunch dinner
party birthday gift movie film music song concert band ticket tickets game
book books beach park garden walk hike trip vacation holiday travel train bus
car bike road city town country weather rain sunny cloudy snow wind forecast
friend friends family mother father sister brother parents kids children baby
dog cat place time question answer idea plan plans news story photo picture
phone call message email price sale cheap expensive money cash card half
hour minute second moment while ingredients pasta pizza salad fruit vegetables
chicken fish bread cheese cake chocolate sweet delicious tasty hungry thirsty
ready busy free tired happy sad glad excited worried nervous angry calm fine
great nice lovely wonderful amazing awesome perfect beautiful interesting
boring funny serious important special easy hard difficult simple possible
table chair door window light computer screen internet online count
doctor nurse dentist clinic hospital pharmacy medicine medication pill pills
prescription dose appointment checkup surgery operation recovery patient
symptom symptoms pain painful ache headache stomachache fever cough cold flu
virus infection allergy allergic rash sore throat nose runny chest heart
blood pressure pulse temperature test tests results scan xray injury wound
bandage healthy health unhealthy diet exercise workout muscle muscles gym
weight sleep insomnia rest stress anxiety relax vitamins protein gain lose
taper painkillers monitor weekly check unusual brings dental often whenever
proceed picnic recommend lucky played expensive amazing deadline thursday
everyone seems ingredients stop surgery feeling painkillers pressure
prescription close evening pick switch helps cutting waking keep three
"""


def main() -> None:
    seen = []
    for word in RANKED.split():
        if word not in seen:
            seen.append(word)
    out = Path(__file__).resolve().parents[1] / "src" / "spellerkit" / "data" / "wordfreq.tsv"
    lines = ["# word\tcount"]
    for rank, word in enumerate(seen, start=1):
        lines.append(f"{word}\t{round(1e7 / rank**1.05)}")
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(seen)} words to {out}")


if __name__ == "__main__":
    main()
