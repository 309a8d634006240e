from __future__ import annotations

from django.core.management import BaseCommand, CommandError

from netbandit.forms import ExperimentForm
from netbandit.harness import prepare_dataset

from ._options import DOMAIN_ERRORS, add_experiment_arguments, merge_options, validated_form


class Command(BaseCommand):
    help = "Build or reuse the cached MCL clustering and cluster matching of a dataset."

    def add_arguments(self, parser) -> None:
        add_experiment_arguments(parser)

    def handle(self, *args, **options) -> None:
        form = validated_form(ExperimentForm, merge_options(options))
        config = form.to_configs()[0]
        try:
            prepared = prepare_dataset(config, with_clusters=True)
        except DOMAIN_ERRORS as exc:
            raise CommandError(str(exc)) from exc

        matching = prepared.manifest["cache"].get("matching", {})
        self.stdout.write(
            f"{prepared.name}: {prepared.graph.n_nodes} nodes, {prepared.graph.n_edges} edges, "
            f"{prepared.clustering.n_clusters} clusters, "
            f"{len(prepared.match_map)} matched cluster pairs"
        )
        self.stdout.write(
            f"gamma={matching.get('gamma')} beta={matching.get('beta')}"
        )
