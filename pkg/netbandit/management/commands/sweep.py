from __future__ import annotations

from pathlib import Path

from django.core.management import BaseCommand, CommandError

from netbandit.forms import SweepForm
from netbandit.harness import prepare_dataset, run_alpha_sweep, write_sweep_outputs

from ._options import DOMAIN_ERRORS, add_experiment_arguments, merge_options, validated_form


class Command(BaseCommand):
    help = "Sweep the UCB exploration weight and tabulate final RMSE% and R/A per design."

    def add_arguments(self, parser) -> None:
        add_experiment_arguments(parser)
        parser.add_argument("--alphas", help='Inclusive range such as "1..30" or a list "1,4,8".')
        parser.add_argument(
            "--alpha",
            type=float,
            help="Exploration weight recorded for the A/B rows' base config.",
        )

    def handle(self, *args, **options) -> None:
        form = validated_form(SweepForm, merge_options(options))
        sweep = form.to_sweep()
        needs_clusters = any(design.needs_clustering for design in sweep.designs)

        try:
            prepared = prepare_dataset(sweep.base, with_clusters=needs_clusters)
            result = run_alpha_sweep(sweep, prepared)
            written = write_sweep_outputs(Path(sweep.base.output_dir), result, prepared.manifest)
        except DOMAIN_ERRORS as exc:
            raise CommandError(str(exc)) from exc

        self.stdout.write(f"{len(result.table)} sweep cells over {len(sweep.alphas)} alpha values.")
        for path in written:
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
