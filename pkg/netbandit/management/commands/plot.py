from __future__ import annotations

from pathlib import Path

import pandas as pd
from django.core.management import BaseCommand, CommandError

from netbandit.forms import PlotForm
from netbandit.harness import AGGREGATE_FILE, SWEEP_FILE
from netbandit.plotting import emit_plots

from ._options import validated_form


class Command(BaseCommand):
    help = "Render SVG figures from a results directory."

    def add_arguments(self, parser) -> None:
        parser.add_argument("--input", dest="input_dir", required=True)
        parser.add_argument("--figure", default="all", help="tradeoff, trace or all.")
        parser.add_argument("--out", dest="output_dir", help="Defaults to the input directory.")

    def _read(self, path: Path) -> pd.DataFrame:
        if not path.exists():
            raise CommandError(f"{path} not found; run the matching command first.")
        return pd.read_csv(path)

    def handle(self, *args, **options) -> None:
        form = validated_form(
            PlotForm,
            {
                "input_dir": options["input_dir"],
                "figure": options["figure"],
                "output_dir": options.get("output_dir") or "",
            },
        )
        input_dir = Path(form.cleaned_data["input_dir"])
        output_dir = Path(form.cleaned_data["output_dir"] or input_dir)
        figure = form.cleaned_data["figure"]

        sweep_table = None
        aggregate = None
        if figure in ("tradeoff", "all"):
            sweep_path = input_dir / SWEEP_FILE
            if figure == "tradeoff" or sweep_path.exists():
                sweep_table = self._read(sweep_path)
        if figure in ("trace", "all"):
            aggregate = self._read(input_dir / AGGREGATE_FILE)

        for path in emit_plots(output_dir, sweep_table=sweep_table, aggregate=aggregate):
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
