from __future__ import annotations

from pathlib import Path

from django.core.management import BaseCommand, CommandError

from netbandit.forms import ExperimentForm
from netbandit.harness import (
    prepare_dataset,
    run_experiment,
    write_experiment_outputs,
)
from netbandit.metrics import final_checkpoints

from ._options import DOMAIN_ERRORS, add_experiment_arguments, merge_options, validated_form


class Command(BaseCommand):
    help = "Run seeded experiments for one or more designs and write trace and aggregate CSVs."

    def add_arguments(self, parser) -> None:
        add_experiment_arguments(parser)
        parser.add_argument("--alpha", type=float, help="UCB exploration weight.")

    def handle(self, *args, **options) -> None:
        form = validated_form(ExperimentForm, merge_options(options))
        configs = form.to_configs()
        needs_clusters = any(config.design.needs_clustering for config in configs)

        try:
            prepared = prepare_dataset(configs[0], with_clusters=needs_clusters)
            results = [run_experiment(config, prepared) for config in configs]
            written = write_experiment_outputs(Path(configs[0].output_dir), results, prepared)
        except DOMAIN_ERRORS as exc:
            raise CommandError(str(exc)) from exc

        for result in results:
            for row in final_checkpoints(result.aggregate).itertuples(index=False):
                self.stdout.write(
                    f"{row.design}: arrivals={row.arrivals} rmse_pct={row.rmse_pct:.4g} "
                    f"ra_ratio={row.ra_ratio:.4g}"
                )
        for path in written:
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
