from django import forms

from .config import ExperimentConfig, SweepConfig, parse_alpha_list
from .designs import DESIGN_CHOICES, DesignKind


class FigureOptions:
    FIGURE_OPTIONS = (
        ('tradeoff', 'R/A vs TTE error across alpha'),
        ('trace', 'Metrics vs arrivals'),
        ('all', 'Both figures'),
    )


class ExperimentForm(forms.Form):
    dataset = forms.CharField(label='Dataset name or directory')
    designs = forms.MultipleChoiceField(label='Designs', choices=DESIGN_CHOICES)
    alpha = forms.FloatField(label='Exploration weight', min_value=0.0)
    runs = forms.IntegerField(label='Runs', min_value=1)
    interval = forms.IntegerField(label='Checkpoint interval', min_value=1)
    p_treated = forms.FloatField(label='Treatment activation', min_value=0.0, max_value=1.0)
    p_control = forms.FloatField(label='Control activation', min_value=0.0, max_value=1.0)
    seed = forms.IntegerField(label='Master seed', min_value=0)
    explore_fraction = forms.FloatField(label='Explore fraction', max_value=1.0)
    random_ties = forms.BooleanField(required=False)
    event_log = forms.BooleanField(required=False)
    recluster = forms.BooleanField(required=False)
    output_dir = forms.CharField(label='Output directory')

    expansion = forms.IntegerField(label='MCL expansion', min_value=2)
    inflation = forms.FloatField(label='MCL inflation')
    prune_threshold = forms.FloatField(label='MCL prune threshold', min_value=0.0)
    max_iterations = forms.IntegerField(label='MCL iterations', min_value=1)
    convergence_epsilon = forms.FloatField(label='MCL convergence epsilon')
    gamma_sample_size = forms.IntegerField(label='Gamma sample size', min_value=1)
    matching_seed = forms.IntegerField(label='Matching seed', min_value=0)

    def clean_explore_fraction(self):
        value = self.cleaned_data['explore_fraction']
        if value <= 0:
            raise forms.ValidationError('Explore fraction must be positive.')
        return value

    def clean_inflation(self):
        value = self.cleaned_data['inflation']
        if value <= 1:
            raise forms.ValidationError('MCL inflation must exceed 1.')
        return value

    def clean_convergence_epsilon(self):
        value = self.cleaned_data['convergence_epsilon']
        if value <= 0:
            raise forms.ValidationError('MCL convergence epsilon must be positive.')
        return value

    def clean(self):
        cleaned_data = super().clean()
        p_treated = cleaned_data.get('p_treated')
        p_control = cleaned_data.get('p_control')
        if p_treated is not None and p_control is not None and p_control >= p_treated:
            # RMSE is reported as a percentage of the true effect.
            raise forms.ValidationError(
                'p_control must be below p_treated so the true effect is positive.'
            )
        return cleaned_data

    def to_configs(self) -> list[ExperimentConfig]:
        return [
            ExperimentConfig.from_cleaned(self.cleaned_data, DesignKind(design))
            for design in self.cleaned_data['designs']
        ]


class SweepForm(ExperimentForm):
    alphas = forms.CharField(label='Alpha values')

    def clean_alphas(self):
        try:
            return parse_alpha_list(self.cleaned_data['alphas'])
        except ValueError as exc:
            raise forms.ValidationError(f'Invalid alpha list: {exc}')

    def to_sweep(self) -> SweepConfig:
        designs = tuple(DesignKind(design) for design in self.cleaned_data['designs'])
        return SweepConfig(
            base=ExperimentConfig.from_cleaned(self.cleaned_data, designs[0]),
            alphas=self.cleaned_data['alphas'],
            designs=designs,
        )


class PlotForm(forms.Form):
    input_dir = forms.CharField(label='Results directory')
    figure = forms.ChoiceField(label='Figure', choices=FigureOptions.FIGURE_OPTIONS)
    output_dir = forms.CharField(label='Output directory', required=False)
