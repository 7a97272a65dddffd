from django.apps import AppConfig


class ResistanceConfig(AppConfig):
    name = 'resistance'
